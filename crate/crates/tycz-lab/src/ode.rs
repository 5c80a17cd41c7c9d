//! The tube ODE `(y'/r)^{n-1} y'' = e^y`, `y'(0) = 0`, `y''(0) = e^{y0/n}`,
//! solved from the origin out to its blow-up boundary r = a.
//!
//! Three regimes are stitched together:
//!
//! 1. near r = 0 the equation has a removable 0/0, so the profile is
//!    bootstrapped from the origin Taylor series;
//! 2. a Dormand–Prince 5(4) integrator carries `(y, y')` in r through the
//!    moderate interior;
//! 3. once y has grown past the handoff threshold the roles are swapped:
//!    y becomes the independent variable with state `(r, log y')`. In
//!    these variables the blow-up is completely regular — `r` converges
//!    geometrically to `a` as y grows, and `log y'` grows with slope 1/3 —
//!    so the boundary radius falls out of a smooth integration instead of
//!    a step-size collapse.
//!
//! Third and fourth derivatives come from differentiating the ODE once
//! and twice in closed form (the derivative cascade); the origin series
//! doubles as the correctness oracle for that cascade.

use serde::Serialize;
use thiserror::Error;

use crate::extrapolate::power_law_limit;
use crate::series::{calabi_series, SeriesError, TaylorPoly};

#[derive(Debug, Error)]
pub enum OdeError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("dimension n must be at least 2, got {0}")]
    DimensionTooSmall(u32),
    #[error("operation requires the n = 2 reduction, profile has n = {0}")]
    DimensionNotTwo(u32),
    #[error("integrator step collapsed at t = {t}")]
    StepCollapse { t: f64 },
    #[error("profile not integrated deep enough: max y' = {max_yp:e}, need > {need:e}")]
    NotDeepEnough { max_yp: f64, need: f64 },
    #[error("radius {r} outside profile coverage (0, {r_max})")]
    OutOfCoverage { r: f64, r_max: f64 },
    #[error("profile fails validation: {0}")]
    Invalid(String),
    #[error(transparent)]
    Extrapolate(#[from] crate::extrapolate::ExtrapolateError),
}

/// Solver settings. `Default` reproduces the reference configuration used
/// by the verification suite; [`SolverConfig::quick`] is a coarse preset
/// for examples and smoke tests.
#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    pub y0: f64,
    pub n: u32,
    /// Truncation order of the origin series (even).
    pub series_order: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Integrate until y - y0 reaches this span; `a` is read off the end.
    pub boundary_y_span: f64,
    /// Keep grid samples only up to this fraction of the span, so the last
    /// stored radius stays strictly below the boundary estimate.
    pub grid_span_fraction: f64,
    /// Grid density target near both endpoints.
    pub pts_per_decade: f64,
    /// Number of decades of the origin ladder below the series handoff.
    pub origin_decades: f64,
    /// Swap to the y-parameterization once y - y0 exceeds this.
    pub phase_swap_dy: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            y0: 0.0,
            n: 2,
            series_order: 40,
            rtol: 1e-12,
            atol: 1e-14,
            boundary_y_span: 120.0,
            grid_span_fraction: 0.75,
            pts_per_decade: 200.0,
            origin_decades: 4.0,
            phase_swap_dy: 1.0,
        }
    }
}

impl SolverConfig {
    /// Coarse, fast settings for documentation examples and smoke tests.
    pub fn quick() -> Self {
        SolverConfig {
            series_order: 24,
            rtol: 1e-9,
            atol: 1e-11,
            boundary_y_span: 60.0,
            pts_per_decade: 60.0,
            origin_decades: 3.0,
            ..SolverConfig::default()
        }
    }

    pub fn with_y0(mut self, y0: f64) -> Self {
        self.y0 = y0;
        self
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }
}

/// One grid record: radius and the derivative cascade of y.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileSample {
    pub r: f64,
    pub y: f64,
    pub yp: f64,
    pub ypp: f64,
    pub yppp: f64,
    pub ypppp: f64,
}

/// Validated solution of the tube ODE on a grid clustered toward both
/// r = 0 and r = a.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub n: u32,
    pub y0: f64,
    pub samples: Vec<ProfileSample>,
    pub a_estimate: f64,
    pub a_uncertainty: f64,
    /// Handoff radius between the origin series and the integrator.
    pub switch_radius: f64,
    /// Max relative ODE residual over the grid.
    pub residual_max: f64,
    /// Accumulated integrator error estimate on y (safety-factored).
    pub y_error_estimate: f64,
    /// The origin series, kept for small-radius evaluation downstream.
    pub series: TaylorPoly,
    pub config: SolverConfig,
}

/// y'', y''', y'''' from the ODE and its first two r-derivatives.
pub fn derivative_cascade(n: u32, r: f64, y: f64, yp: f64) -> (f64, f64, f64) {
    let e = y.exp();
    let nm1 = (n - 1) as f64;
    let w2 = r.powi(n as i32 - 1) * e / yp.powi(n as i32 - 1);
    let bracket = nm1 / r + yp - nm1 * w2 / yp;
    let w3 = w2 * bracket;
    let w4 = w3 * bracket + w2 * (-nm1 / (r * r) + w2 - nm1 * (w3 * yp - w2 * w2) / (yp * yp));
    (w2, w3, w4)
}

const DY_SWAP_GUARD: f64 = 1e-3;

/// Dormand–Prince 5(4) with FSAL, step cap and an optional stop condition
/// on a monotone component. Calls `on_step` after every accepted step.
struct Dopri5<'a, F> {
    f: F,
    rtol: f64,
    atol: f64,
    h_cap: f64,
    on_step: &'a mut dyn FnMut(f64, [f64; 2]),
}

enum StopWhen {
    AtT(f64),
    /// Stop once state component `idx` reaches `value` (increasing).
    ComponentReaches {
        idx: usize,
        value: f64,
    },
}

impl<'a, F: Fn(f64, [f64; 2]) -> [f64; 2]> Dopri5<'a, F> {
    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        t0: f64,
        mut y: [f64; 2],
        stop: StopWhen,
    ) -> Result<(f64, [f64; 2], f64), OdeError> {
        const A: [[f64; 6]; 6] = [
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
                0.0,
                0.0,
            ],
            [
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
                0.0,
            ],
            [
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
        ];
        const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
        // 5th-order minus 4th-order weights, for the error estimate
        const E: [f64; 7] = [
            35.0 / 384.0 - 5179.0 / 57600.0,
            0.0,
            500.0 / 1113.0 - 7571.0 / 16695.0,
            125.0 / 192.0 - 393.0 / 640.0,
            -2187.0 / 6784.0 + 92097.0 / 339200.0,
            11.0 / 84.0 - 187.0 / 2100.0,
            -1.0 / 40.0,
        ];

        let mut t = t0;
        let mut k1 = (self.f)(t, y);
        let mut h: f64 = self.h_cap.min(1e-3);
        let mut err_accum = 0.0;

        let step =
            |f: &F, t: f64, y: [f64; 2], k1: [f64; 2], h: f64| -> ([f64; 2], [f64; 2], f64) {
                let mut k = [[0.0; 2]; 7];
                k[0] = k1;
                for s in 0..6 {
                    let mut ys = y;
                    for (j, kj) in k.iter().enumerate().take(s + 1) {
                        ys[0] += h * A[s][j] * kj[0];
                        ys[1] += h * A[s][j] * kj[1];
                    }
                    k[s + 1] = f(t + C[s] * h, ys);
                }
                // stage 7 is evaluated at the 5th-order solution (FSAL)
                let ynew = {
                    let mut ys = y;
                    for (j, kj) in k.iter().enumerate().take(6) {
                        ys[0] += h * A[5][j] * kj[0];
                        ys[1] += h * A[5][j] * kj[1];
                    }
                    ys
                };
                let mut err = [0.0; 2];
                for (j, kj) in k.iter().enumerate() {
                    err[0] += E[j] * kj[0];
                    err[1] += E[j] * kj[1];
                }
                let mut norm: f64 = 0.0;
                for i in 0..2 {
                    let sc = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                    norm = norm.max((h * err[i] / sc).abs());
                }
                (ynew, k[6], norm)
            };

        loop {
            let t_lim = match stop {
                StopWhen::AtT(te) => te,
                StopWhen::ComponentReaches { .. } => f64::INFINITY,
            };
            if t >= t_lim {
                return Ok((t, y, err_accum));
            }
            h = h.min(self.h_cap).min(t_lim - t);
            if h < 1e-15 * (t.abs() + 1.0) {
                return Err(OdeError::StepCollapse { t });
            }
            let (ynew, k7, norm) = step(&self.f, t, y, k1, h);
            if norm <= 1.0 {
                // crossing the stop component? cut the step by bisection
                if let StopWhen::ComponentReaches { idx, value } = stop {
                    if ynew[idx] >= value {
                        let mut lo = 0.0;
                        let mut hi = h;
                        let mut yhit = ynew;
                        for _ in 0..60 {
                            let mid = 0.5 * (lo + hi);
                            let (ymid, _, _) = step(&self.f, t, y, k1, mid);
                            if ymid[idx] >= value {
                                hi = mid;
                                yhit = ymid;
                            } else {
                                lo = mid;
                            }
                        }
                        let t_hit = t + hi;
                        (self.on_step)(t_hit, yhit);
                        return Ok((t_hit, yhit, err_accum));
                    }
                }
                t += h;
                err_accum += norm * (self.atol + self.rtol * ynew[0].abs());
                y = ynew;
                k1 = k7;
                (self.on_step)(t, y);
            }
            let factor = if norm > 0.0 {
                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h *= factor;
        }
    }
}

/// Solve the tube problem to the blow-up boundary and return a validated
/// profile.
pub fn solve_profile(config: &SolverConfig) -> Result<RadialProfile, OdeError> {
    if config.n < 2 {
        return Err(OdeError::DimensionTooSmall(config.n));
    }
    let y0 = config.y0;
    let n = config.n;
    let series = calabi_series(y0, n, config.series_order)?;

    let switch_radius = pick_switch_radius(&series, n);

    // coarse pass fixes the scale of a; fine pass produces the grid
    let coarse = integrate(config, &series, switch_radius, 1e-9, 1e-11, None)?;
    let caps = StepCaps {
        dr: coarse.a / 400.0,
        dy: 3.0 * std::f64::consts::LN_10 / config.pts_per_decade,
    };
    let mut grid: Vec<(f64, f64, f64)> = Vec::new();
    let fine = integrate(
        config,
        &series,
        switch_radius,
        config.rtol,
        config.atol,
        Some((&caps, &mut grid)),
    )?;

    let a_estimate = fine.a;
    let a_uncertainty = (fine.a - coarse.a).abs().max(fine.a_err * 10.0).max(4.0 * f64::EPSILON * fine.a);

    let mut samples = Vec::new();
    // origin ladder from the series, geometric toward r = 0
    let ratio = 10f64.powf(1.0 / config.pts_per_decade);
    let n_ladder = (config.pts_per_decade * config.origin_decades) as usize;
    let mut r = switch_radius / ratio;
    for _ in 0..n_ladder {
        samples.push(sample_from_series(&series, r));
        r /= ratio;
    }
    samples.reverse();
    // integrator grid; drop repeated radii once r stops advancing in f64
    let grid_y_cut = y0 + config.boundary_y_span * config.grid_span_fraction;
    let mut last_r = samples.last().map(|s| s.r).unwrap_or(0.0);
    for &(r, y, yp) in &grid {
        if r <= last_r || y > grid_y_cut {
            continue;
        }
        let (ypp, yppp, ypppp) = derivative_cascade(n, r, y, yp);
        samples.push(ProfileSample {
            r,
            y,
            yp,
            ypp,
            yppp,
            ypppp,
        });
        last_r = r;
    }

    let mut profile = RadialProfile {
        n,
        y0,
        samples,
        a_estimate,
        a_uncertainty,
        switch_radius,
        residual_max: 0.0,
        y_error_estimate: fine.y_err * 10.0,
        series,
        config: config.clone(),
    };
    profile.residual_max = ode_residual(&profile);
    profile.validate()?;
    Ok(profile)
}

struct StepCaps {
    dr: f64,
    dy: f64,
}

struct IntegrateOut {
    a: f64,
    a_err: f64,
    y_err: f64,
}

/// Run both integration phases. When `capture` is provided, accepted steps
/// are appended as (r, y, y').
fn integrate(
    config: &SolverConfig,
    series: &TaylorPoly,
    switch_radius: f64,
    rtol: f64,
    atol: f64,
    capture: Option<(&StepCaps, &mut Vec<(f64, f64, f64)>)>,
) -> Result<IntegrateOut, OdeError> {
    let y0 = config.y0;
    let n = config.n;
    let nm1 = (n - 1) as i32;
    let (caps, mut grid) = match capture {
        Some((c, g)) => (Some(c), Some(g)),
        None => (None, None),
    };

    // phase 1: (y, y') in r from the series handoff until y - y0 = swap
    let r_sw = switch_radius;
    let state0 = [series.eval(r_sw), series.eval_deriv(r_sw, 1)];
    if let Some(g) = grid.as_deref_mut() {
        g.push((r_sw, state0[0], state0[1]));
    }
    let f1 = |r: f64, s: [f64; 2]| [s[1], r.powi(nm1) * s[0].exp() / s[1].powi(nm1)];
    let mut sink1: Box<dyn FnMut(f64, [f64; 2])> = match grid.as_deref_mut() {
        Some(g) => Box::new(|r, s| g.push((r, s[0], s[1]))),
        None => Box::new(|_, _| {}),
    };
    let mut p1 = Dopri5 {
        f: f1,
        rtol,
        atol,
        h_cap: caps.map(|c| c.dr).unwrap_or(0.05),
        on_step: sink1.as_mut(),
    };
    let y_swap = y0 + config.phase_swap_dy;
    let (r1, s1, e1) = p1.run(
        r_sw,
        state0,
        StopWhen::ComponentReaches {
            idx: 0,
            value: y_swap,
        },
    )?;
    drop(p1);
    drop(sink1);
    if (s1[0] - y_swap).abs() > DY_SWAP_GUARD {
        return Err(OdeError::Invalid(format!(
            "phase handoff missed: y = {} vs target {}",
            s1[0], y_swap
        )));
    }

    // phase 2: t = y independent, state (r, phi = log y')
    let t_end = y0 + config.boundary_y_span;
    let f2 = move |t: f64, s: [f64; 2]| {
        [
            (-s[1]).exp(),
            s[0].powi(nm1) * (t - (n + 1) as f64 * s[1]).exp(),
        ]
    };
    let mut sink2: Box<dyn FnMut(f64, [f64; 2])> = match grid.as_deref_mut() {
        Some(g) => Box::new(|t, s| g.push((s[0], t, s[1].exp()))),
        None => Box::new(|_, _| {}),
    };
    let mut p2 = Dopri5 {
        f: f2,
        rtol,
        atol,
        h_cap: caps.map(|c| c.dy).unwrap_or(0.25),
        on_step: sink2.as_mut(),
    };
    let (t_f, s_f, e2) = p2.run(s1[0], [r1, s1[1].ln()], StopWhen::AtT(t_end))?;
    drop(p2);
    drop(sink2);

    // tail beyond t_end: dr/dt = e^{-phi} with phi' -> 1/3
    let phi_end = s_f[1];
    let tail = 3.0 * (-phi_end).exp();
    let _ = t_f;
    Ok(IntegrateOut {
        a: s_f[0] + tail,
        a_err: e2,
        y_err: e1 + e2,
    })
}

fn sample_from_series(series: &TaylorPoly, r: f64) -> ProfileSample {
    ProfileSample {
        r,
        y: series.eval(r),
        yp: series.eval_deriv(r, 1),
        ypp: series.eval_deriv(r, 2),
        yppp: series.eval_deriv(r, 3),
        ypppp: series.eval_deriv(r, 4),
    }
}

/// Largest handoff radius at which the truncated series still satisfies
/// the ODE to ~1e-13 relative, with a margin against the last kept term.
fn pick_switch_radius(series: &TaylorPoly, n: u32) -> f64 {
    let ord = series.order;
    let b_last = series.coeffs[ord].abs().max(1e-300);
    let b_prev = series.coeffs[ord - 2].abs().max(1e-300);
    let rho = (b_prev / b_last).sqrt(); // ratio estimate of the convergence radius
    let mut r = 0.5 * rho;
    for _ in 0..200 {
        let tail = b_last * r.powi(ord as i32);
        let y = series.eval(r);
        let yp = series.eval_deriv(r, 1);
        let ypp = series.eval_deriv(r, 2);
        let resid = ((yp / r).powi(n as i32 - 1) * ypp - y.exp()).abs() / y.exp();
        if resid < 1e-13 && tail < 1e-14 * y.abs().max(1.0) {
            return r;
        }
        r *= 0.96;
    }
    r
}

impl RadialProfile {
    /// Max over the grid of the relative ODE residual
    /// `|(y'/r)^{n-1} y'' - e^y| / e^y` evaluated on the stored samples.
    /// For the tube metric this is exactly the volume identity
    /// `det g = e^f`.
    pub fn residual(&self) -> f64 {
        let nm1 = self.n as i32 - 1;
        self.samples
            .iter()
            .map(|s| {
                let e = s.y.exp();
                ((s.yp / s.r).powi(nm1) * s.ypp - e).abs() / e
            })
            .fold(0.0, f64::max)
    }

    /// Grid invariants: positivity, monotonicity, residual bound, and the
    /// cascade's agreement with finite differences.
    pub fn validate(&self) -> Result<(), OdeError> {
        if self.samples.len() < 32 {
            return Err(OdeError::Invalid(format!(
                "only {} samples",
                self.samples.len()
            )));
        }
        let mut prev_r = 0.0;
        let mut prev_y = f64::NEG_INFINITY;
        for s in &self.samples {
            if !(s.r > prev_r) {
                return Err(OdeError::Invalid(format!("grid not increasing at r = {}", s.r)));
            }
            if !(s.yp > 0.0 && s.ypp > 0.0) {
                return Err(OdeError::Invalid(format!(
                    "positivity fails at r = {}: y' = {}, y'' = {}",
                    s.r, s.yp, s.ypp
                )));
            }
            if !(s.y > prev_y) {
                return Err(OdeError::Invalid(format!("y not increasing at r = {}", s.r)));
            }
            prev_r = s.r;
            prev_y = s.y;
        }
        if self.samples.last().unwrap().r >= self.a_estimate {
            return Err(OdeError::Invalid("grid reaches the boundary estimate".into()));
        }
        let resid = self.residual();
        if resid > 1e-9 {
            return Err(OdeError::Invalid(format!("ODE residual {resid:e} > 1e-9")));
        }
        Ok(())
    }

    pub fn r_max(&self) -> f64 {
        self.samples.last().map(|s| s.r).unwrap_or(0.0)
    }

    /// Evaluate the cascade at an arbitrary radius: the series below the
    /// handoff, a two-point quintic Hermite between grid samples above it.
    pub fn eval(&self, r: f64) -> Result<ProfileSample, OdeError> {
        if !(r > 0.0) || r > self.r_max() {
            return Err(OdeError::OutOfCoverage {
                r,
                r_max: self.r_max(),
            });
        }
        if r <= self.switch_radius {
            return Ok(sample_from_series(&self.series, r));
        }
        let idx = self
            .samples
            .partition_point(|s| s.r < r)
            .clamp(1, self.samples.len() - 1);
        let lo = &self.samples[idx - 1];
        let hi = &self.samples[idx];
        let h = hi.r - lo.r;
        let s = (r - lo.r) / h;
        // quintic Hermite on (y, y', y'') at both ends
        let aa = hi.y - (lo.y + h * lo.yp + 0.5 * h * h * lo.ypp);
        let bb = h * hi.yp - (h * lo.yp + h * h * lo.ypp);
        let cc = h * h * hi.ypp - h * h * lo.ypp;
        let c5 = 0.5 * (cc - 6.0 * bb + 12.0 * aa);
        let c4 = 7.0 * bb - 15.0 * aa - cc;
        let c3 = 10.0 * aa - 4.0 * bb + 0.5 * cc;
        let s2 = s * s;
        let s3 = s2 * s;
        let y = lo.y + h * lo.yp * s + 0.5 * h * h * lo.ypp * s2 + s3 * (c3 + c4 * s + c5 * s2);
        let yp = lo.yp
            + h * lo.ypp * s
            + (3.0 * c3 * s2 + 4.0 * c4 * s3 + 5.0 * c5 * s2 * s2) / h;
        let (ypp, yppp, ypppp) = derivative_cascade(self.n, r, y, yp);
        Ok(ProfileSample {
            r,
            y,
            yp,
            ypp,
            yppp,
            ypppp,
        })
    }

    /// Indices of samples with r in [lo_frac, hi_frac]·a.
    pub fn interior_indices(&self, lo_frac: f64, hi_frac: f64) -> Vec<usize> {
        let lo = lo_frac * self.a_estimate;
        let hi = hi_frac * self.a_estimate;
        (0..self.samples.len())
            .filter(|&i| self.samples[i].r >= lo && self.samples[i].r <= hi)
            .collect()
    }

    /// CSV rows `r,y,yp,ypp,yppp,ypppp` at full precision.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "r,y,yp,ypp,yppp,ypppp")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.r, s.y, s.yp, s.ypp, s.yppp, s.ypppp
            )?;
        }
        Ok(())
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "y0": self.y0,
            "n": self.n,
            "a_estimate": self.a_estimate,
            "a_uncertainty": self.a_uncertainty,
            "residual_max": self.residual_max,
            "switch_radius": self.switch_radius,
            "samples": self.samples.len(),
            "r_max": self.r_max(),
        })
    }
}

/// Boundary-radius estimates from the two independent routes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryEstimate {
    /// From the deep integration (limit of r along the solution).
    pub a: f64,
    /// From extrapolating `e^y / y'^3 -> 1/(3a)`.
    pub a_from_limit: f64,
    /// Relative disagreement of the two.
    pub spread: f64,
}

/// Estimate the blow-up radius two ways and report the spread.
pub fn estimate_boundary(profile: &RadialProfile) -> Result<BoundaryEstimate, OdeError> {
    if profile.n != 2 {
        return Err(OdeError::DimensionNotTwo(profile.n));
    }
    let max_yp = profile.samples.iter().map(|s| s.yp).fold(0.0, f64::max);
    if max_yp <= 1e6 {
        return Err(OdeError::NotDeepEnough {
            max_yp,
            need: 1e6,
        });
    }
    let a = profile.a_estimate;
    // q = e^y / y'^3 sampled on a geometric ladder of s = a - r
    let (s, q) = boundary_window(profile, 15.0, 0.55, 3.0, |smp| {
        (smp.y - 3.0 * smp.yp.ln()).exp()
    });
    let fit = power_law_limit(&s, &q)?;
    let a_from_limit = 1.0 / (3.0 * fit.limit);
    Ok(BoundaryEstimate {
        a,
        a_from_limit,
        spread: (a - a_from_limit).abs() / a,
    })
}

/// Sample a functional of the profile on a ladder of y-values
/// `y0 + dy_lo .. y0 + frac·span` with spacing `step`; returns (s, q)
/// with s = a - r decreasing.
pub(crate) fn boundary_window(
    profile: &RadialProfile,
    dy_lo: f64,
    frac: f64,
    step: f64,
    f: impl Fn(&ProfileSample) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let y0 = profile.y0;
    let y_hi = y0 + profile.config.boundary_y_span * profile.config.grid_span_fraction * frac;
    let mut s_out = Vec::new();
    let mut q_out = Vec::new();
    let mut target = y0 + dy_lo;
    let mut idx = 0;
    while target <= y_hi {
        while idx < profile.samples.len() && profile.samples[idx].y < target {
            idx += 1;
        }
        if idx >= profile.samples.len() {
            break;
        }
        let smp = &profile.samples[idx];
        let s = profile.a_estimate - smp.r;
        if s > 0.0 {
            s_out.push(s);
            q_out.push(f(smp));
        }
        target += step;
    }
    (s_out, q_out)
}

/// Max relative residual of the ODE over the stored grid.
pub fn ode_residual(profile: &RadialProfile) -> f64 {
    profile.residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quick_profile() -> RadialProfile {
        solve_profile(&SolverConfig::quick()).unwrap()
    }

    #[test]
    fn small_radius_matches_leading_coefficients() {
        let p = quick_profile();
        for r in [0.05, 0.1, 0.2] {
            let s = p.eval(r).unwrap();
            let approx3 = r * r / 2.0 + r.powi(4) / 32.0 + 7.0 * r.powi(6) / 2304.0;
            // the neglected term is b8 r^8 with b8 ≈ 3.3e-4
            assert!(
                (s.y - approx3).abs() < 1e-3 * r.powi(8) + 1e-13,
                "r = {r}: y = {} vs truncation {}",
                s.y,
                approx3
            );
        }
    }

    #[test]
    fn origin_data_recovered_by_extrapolation() {
        let p = quick_profile();
        // y'(r)/r -> y''(0) = e^{y0/n} and y'(0) = 0
        let mut rs = Vec::new();
        let mut q = Vec::new();
        for k in 1..10 {
            let r = 1e-3 * k as f64;
            let s = p.eval(r).unwrap();
            rs.push(r);
            q.push(s.yp / r);
        }
        let fit = crate::extrapolate::even_poly_limit(&rs, &q, 2).unwrap();
        assert_relative_eq!(fit.limit, 1.0, max_relative = 1e-10);
        let s_small = p.eval(1e-5).unwrap();
        assert!(s_small.yp.abs() < 2e-5);
        assert_relative_eq!(s_small.ypp, 1.0, max_relative = 1e-8);
    }

    /// Independent oracle: classical fixed-step RK4 on (y, y') in r,
    /// a different scheme with a much smaller step.
    fn rk4_oracle(y0: f64, n: u32, r_from: f64, y_init: [f64; 2], r_to: f64, steps: usize) -> [f64; 2] {
        let nm1 = n as i32 - 1;
        let f = |r: f64, s: [f64; 2]| [s[1], r.powi(nm1) * s[0].exp() / s[1].powi(nm1)];
        let h = (r_to - r_from) / steps as f64;
        let mut t = r_from;
        let mut y = y_init;
        let _ = y0;
        for _ in 0..steps {
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            t += h;
        }
        y
    }

    #[test]
    fn profile_matches_independent_integrator() {
        let p = solve_profile(&SolverConfig::default()).unwrap();
        let r_from = 0.05;
        let init = p.eval(r_from).unwrap();
        let oracle = rk4_oracle(0.0, 2, r_from, [init.y, init.yp], 0.5, 20_000);
        let here = p.eval(0.5).unwrap();
        assert!(
            (here.y - oracle[0]).abs() < 1e-9,
            "y(0.5): {} vs oracle {}",
            here.y,
            oracle[0]
        );
        assert!((here.yp - oracle[1]).abs() < 1e-9);
    }

    #[test]
    fn determinism_bitwise() {
        let a = quick_profile();
        let b = quick_profile();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.a_estimate, b.a_estimate);
    }

    #[test]
    fn refinement_stays_within_error_estimate() {
        let base = SolverConfig {
            rtol: 1e-10,
            atol: 1e-12,
            ..SolverConfig::quick()
        };
        let p1 = solve_profile(&base).unwrap();
        let p2 = solve_profile(&SolverConfig {
            rtol: base.rtol / 2.0,
            atol: base.atol / 2.0,
            ..base.clone()
        })
        .unwrap();
        for r in [0.5, 1.0, 1.5, 2.0] {
            let d = (p1.eval(r).unwrap().y - p2.eval(r).unwrap().y).abs();
            assert!(
                d <= p1.y_error_estimate,
                "r = {r}: moved {d:e} vs estimate {:e}",
                p1.y_error_estimate
            );
        }
    }

    #[test]
    fn cascade_matches_finite_differences() {
        let p = solve_profile(&SolverConfig::default()).unwrap();
        let a = p.a_estimate;
        for frac in [0.15, 0.3, 0.5, 0.7, 0.85] {
            let r = frac * a;
            let h = 1e-4;
            let sp = p.eval(r + h).unwrap();
            let sm = p.eval(r - h).unwrap();
            let s = p.eval(r).unwrap();
            let fd3 = (sp.ypp - sm.ypp) / (2.0 * h);
            let fd4 = (sp.ypp - 2.0 * s.ypp + sm.ypp) / (h * h);
            assert_relative_eq!(fd3, s.yppp, max_relative = 1e-5);
            assert_relative_eq!(fd4, s.ypppp, max_relative = 1e-4);
        }
    }

    #[test]
    fn boundary_estimates_agree() {
        let p = solve_profile(&SolverConfig::default()).unwrap();
        let est = estimate_boundary(&p).unwrap();
        assert!(
            est.spread < 1e-3,
            "a = {}, a_from_limit = {}, spread = {:e}",
            est.a,
            est.a_from_limit,
            est.spread
        );
        assert!(p.a_uncertainty < 1e-6 * p.a_estimate);
    }

    #[test]
    fn scaling_symmetry_of_the_boundary() {
        // y0 -> y0 + c rescales the boundary radius by e^{-c/(2n)}
        let c = 0.5;
        let p0 = solve_profile(&SolverConfig::default()).unwrap();
        let p1 = solve_profile(&SolverConfig::default().with_y0(c)).unwrap();
        let expected = p0.a_estimate * (-c / 4.0).exp();
        assert_relative_eq!(p1.a_estimate, expected, max_relative = 1e-6);
    }

    #[test]
    fn second_derivative_diverges_at_the_boundary() {
        let p = solve_profile(&SolverConfig::default()).unwrap();
        let last = p.samples.last().unwrap();
        assert!(last.yp > 1e6);
        assert!(last.ypp > 1e10);
        assert!(last.r < p.a_estimate);
    }

    #[test]
    fn residual_detects_corruption() {
        let mut p = quick_profile();
        for s in p.samples.iter_mut() {
            s.ypp *= 1.001;
        }
        let resid = ode_residual(&p);
        assert!((resid - 1e-3).abs() < 2e-4, "residual = {resid:e}");
    }

    #[test]
    fn series_only_region_has_tiny_residual() {
        let p = solve_profile(&SolverConfig::default()).unwrap();
        let nm1 = 1;
        let mut worst: f64 = 0.0;
        for s in p.samples.iter().filter(|s| s.r <= 0.3) {
            let e = s.y.exp();
            worst = worst.max(((s.yp / s.r).powi(nm1) * s.ypp - e).abs() / e);
        }
        assert!(worst <= 1e-12, "series-region residual {worst:e}");
    }

    #[test]
    fn dimension_three_seed() {
        let p = solve_profile(&SolverConfig::quick().with_n(3)).unwrap();
        let s = p.eval(1e-6).unwrap();
        assert_relative_eq!(s.ypp, 1.0, max_relative = 1e-9); // e^{0/3}
        assert!(p.a_estimate > p.r_max());
    }
}
