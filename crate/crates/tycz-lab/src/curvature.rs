//! Closed-form curvature invariants of the n = 2 tube metric.
//!
//! `|R|²` is a function of r alone; the printed closed form has 0/0
//! cancellations of size r⁻⁴ near the origin, so below the series handoff
//! every quantity is evaluated from a Taylor series assembled out of the
//! same grouped combinations whose leading coefficients cancel exactly.
//! Above the handoff the closed form is evaluated directly, and its r-
//! derivatives come from degree-2 Taylor arithmetic along the solution
//! (exact chain rule, no finite differencing).
//!
//! Near the blow-up boundary each decomposition term is evaluated as
//! `exp(k·log y' - m·y) / r^j`, which keeps the huge powers of `y'` and
//! `e^y` in log space.

use serde::Serialize;
use thiserror::Error;

use crate::extrapolate::{even_poly_limit, power_law_limit, ExtrapolateError, LimitFit};
use crate::ode::{boundary_window, OdeError, ProfileSample, RadialProfile};
use crate::series::{Series, SeriesError, TaylorPoly};

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Extrapolate(#[from] ExtrapolateError),
    #[error("profile rejected: {0}")]
    ProfileRejected(String),
}

/// Per-radius record of the curvature invariants and TYCZ coefficients.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureSample {
    pub r: f64,
    /// |R|²
    pub r2: f64,
    /// ∂_r |R|²
    pub dr2: f64,
    /// ∂²_r |R|²
    pub d2r2: f64,
    /// Δ |R|²
    pub lapr2: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub sigma: f64,
    /// Heuristic numerical error bound on a3 (route disagreement based).
    pub a3_err_bound: f64,
}

/// The three boundary groups with `A + B + C = (1/4) y' ∂_r |R|²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryDecomposition {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Metric and inverse of the tube metric at a point (n = 2).
#[derive(Clone, Copy, Debug)]
pub struct MetricAt {
    pub g: [[f64; 2]; 2],
    pub ginv: [[f64; 2]; 2],
}

/// Evaluator tying a validated profile to the series and closed-form
/// curvature routes.
pub struct CurvatureEvaluator<'a> {
    pub profile: &'a RadialProfile,
    r2_series: TaylorPoly,
    dr2_series: TaylorPoly,
    d2r2_series: TaylorPoly,
    /// Below this radius the series route is used.
    pub series_switch: f64,
}

/// |R|² from the printed ten-term closed form.
pub fn r2_closed(r: f64, y: f64, yp: f64) -> f64 {
    let e = y.exp();
    let v = yp;
    let half = 2.0 - 8.0 * r * e / v.powi(3) + v.powi(4) / (r.powi(4) * e * e)
        + 4.0 / (r * v)
        + 12.0 * r * r * e * e / v.powi(6)
        - 2.0 * v / (r.powi(3) * e)
        - 12.0 * e / v.powi(4)
        + 6.0 * v.powi(3) / (r.powi(5) * e * e)
        - 12.0 / (r.powi(4) * e)
        + 12.0 * v * v / (r.powi(6) * e * e);
    2.0 * half
}

/// Magnitude scale of the closed-form terms, for roundoff estimates.
fn r2_closed_scale(r: f64, y: f64, yp: f64) -> f64 {
    let e = y.exp();
    let v = yp;
    [
        2.0,
        8.0 * r * e / v.powi(3),
        v.powi(4) / (r.powi(4) * e * e),
        4.0 / (r * v),
        12.0 * r * r * e * e / v.powi(6),
        2.0 * v / (r.powi(3) * e),
        12.0 * e / v.powi(4),
        6.0 * v.powi(3) / (r.powi(5) * e * e),
        12.0 / (r.powi(4) * e),
        12.0 * v * v / (r.powi(6) * e * e),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        * 2.0
}

/// ∂_r |R|² from the printed thirteen-term display (which gives a quarter
/// of the derivative).
pub fn dr2_printed(r: f64, y: f64, yp: f64) -> f64 {
    let e = y.exp();
    let v = yp;
    let quarter = -4.0 * r * e / (v * v) + 24.0 * r * r * e * e / v.powi(5)
        - 36.0 * r.powi(3) * e.powi(3) / v.powi(8)
        - 8.0 * v.powi(4) / (r.powi(5) * e * e)
        - v.powi(5) / (r.powi(4) * e * e)
        + 3.0 * v * v / (r.powi(3) * e)
        - 3.0 / (r * r * v)
        + 18.0 * v / (r.powi(4) * e)
        - 27.0 * v.powi(3) / (r.powi(6) * e * e)
        + 36.0 / (r.powi(5) * e)
        - 36.0 * v * v / (r.powi(7) * e * e)
        + 36.0 * r * e * e / v.powi(6)
        - 12.0 * e / v.powi(3);
    4.0 * quarter
}

/// Assemble |R|²(r) as an even series from the origin expansion of y.
///
/// The grouped combinations used for the origin limits reappear here:
/// `|R|²/2 = 2 + P⁴/E² + (G₁/r²)/(P³E²) + 12 (G₂/r⁴)/(P⁶E²)` with
/// G₁, G₂ vanishing to the required order.
pub fn r2_series_from(y: &TaylorPoly) -> Result<TaylorPoly, SeriesError> {
    let m = y.order - 2;
    let yt = y.truncate(m);
    let p = y.derivative().shift_down(1, y.max_abs())?.truncate(m);
    let e = yt.exp();
    let p2 = p.mul(&p);
    let p3 = p2.mul(&p);
    let p4 = p2.mul(&p2);
    let p6 = p3.mul(&p3);
    let p8 = p4.mul(&p4);
    let e2 = e.mul(&e);
    let e3 = e2.mul(&e);
    let e4 = e2.mul(&e2);

    let g1 = p2
        .mul(&e2)
        .scale(4.0)
        .sub(&e3.scale(8.0))
        .sub(&p4.mul(&e).scale(2.0))
        .add(&p6.scale(6.0));
    let s1 = g1.shift_down(2, e3.scale(8.0).max_abs().max(p6.scale(6.0).max_abs()))?;
    let g2 = e4.sub(&e3.mul(&p2)).sub(&e.mul(&p6)).add(&p8);
    let s2 = g2.shift_down(4, e4.max_abs().max(p8.max_abs()))?;

    let ord = s2.order;
    let term0 = Series::constant(2.0, ord);
    let term1 = p4.div(&e2)?.truncate(ord);
    let term2 = s1.truncate(ord).div(&p3.mul(&e2).truncate(ord))?;
    let term3 = s2.div(&p6.mul(&e2).truncate(ord))?.scale(12.0);
    Ok(term0.add(&term1).add(&term2).add(&term3).scale(2.0))
}

/// Both evaluation routes for ∂_r |R|².
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DerivativeRoutes {
    /// The printed thirteen-term formula.
    pub printed: f64,
    /// Chain rule through the ten-term closed form (Taylor arithmetic).
    pub differentiated: f64,
}

impl<'a> CurvatureEvaluator<'a> {
    pub fn new(profile: &'a RadialProfile) -> Result<Self, CurvatureError> {
        if profile.n != 2 {
            return Err(CurvatureError::Ode(OdeError::DimensionNotTwo(profile.n)));
        }
        if profile.residual() > 1e-6 {
            return Err(CurvatureError::ProfileRejected(format!(
                "ODE residual {:e} exceeds 1e-6; refusing to evaluate curvature",
                profile.residual()
            )));
        }
        let r2_series = r2_series_from(&profile.series)?;
        let dr2_series = r2_series.derivative();
        let d2r2_series = dr2_series.derivative();
        Ok(CurvatureEvaluator {
            profile,
            r2_series,
            dr2_series,
            d2r2_series,
            series_switch: profile.switch_radius,
        })
    }

    fn check_domain(&self, r: f64) -> Result<(), CurvatureError> {
        if !(r > 0.0) || r > self.profile.r_max() {
            return Err(CurvatureError::Ode(OdeError::OutOfCoverage {
                r,
                r_max: self.profile.r_max(),
            }));
        }
        Ok(())
    }

    /// |R|² at radius r.
    pub fn r2(&self, r: f64) -> Result<f64, CurvatureError> {
        Ok(self.r2_d1_d2(r)?.0)
    }

    /// (|R|², ∂_r |R|², ∂²_r |R|²) at radius r.
    pub fn r2_d1_d2(&self, r: f64) -> Result<(f64, f64, f64), CurvatureError> {
        self.check_domain(r)?;
        if r <= self.series_switch {
            return Ok((
                self.r2_series.eval(r),
                self.dr2_series.eval(r),
                self.d2r2_series.eval(r),
            ));
        }
        let s = self.profile.eval(r)?;
        let t = taylor2_r2(&s);
        Ok((t.coeffs[0], t.coeffs[1], 2.0 * t.coeffs[2]))
    }

    /// The two independent routes for ∂_r |R|²; below the handoff radius
    /// the chain-rule side comes from the series instead.
    pub fn dr2_routes(&self, r: f64) -> Result<DerivativeRoutes, CurvatureError> {
        self.check_domain(r)?;
        let s = self.profile.eval(r)?;
        let differentiated = if r <= self.series_switch {
            self.dr2_series.eval(r)
        } else {
            taylor2_r2(&s).coeffs[1]
        };
        Ok(DerivativeRoutes {
            printed: dr2_printed(r, s.y, s.yp),
            differentiated,
        })
    }

    /// Full curvature record at radius r (n = 2, λ = -1 reduction).
    pub fn sample(&self, r: f64) -> Result<CurvatureSample, CurvatureError> {
        let (r2, dr2, d2r2) = self.r2_d1_d2(r)?;
        let s = self.profile.eval(r)?;
        // σ = -Δ(potential): Δy = y''/y'' + y'/y' for radial functions
        let sigma = -(s.ypp / s.ypp + s.yp / s.yp);
        let lapr2 = d2r2 / s.ypp + dr2 / s.yp;
        let a3_err_bound = self.a3_error_bound(&s, dr2, d2r2);
        Ok(CurvatureSample {
            r,
            r2,
            dr2,
            d2r2,
            lapr2,
            a1: -sigma / 2.0,
            a2: (r2 + 4.0) / 24.0,
            a3: lapr2 / 48.0,
            sigma,
            a3_err_bound,
        })
    }

    /// Route-disagreement based error bound for a3; a conservative
    /// heuristic, not a rigorous bound.
    fn a3_error_bound(&self, s: &ProfileSample, dr2: f64, d2r2: f64) -> f64 {
        let noise = if s.r <= self.series_switch {
            1e-14 * self.r2_series.max_abs()
        } else {
            let printed = dr2_printed(s.r, s.y, s.yp);
            (printed - dr2)
                .abs()
                .max(f64::EPSILON * r2_closed_scale(s.r, s.y, s.yp))
        };
        let rel = noise / dr2.abs().max(1e-9);
        let err_lap = (d2r2.abs() * rel) / s.ypp + noise / s.yp;
        (err_lap / 48.0).max(1e-13)
    }

    /// Curvature records on every grid radius.
    pub fn samples_on_grid(&self) -> Result<Vec<CurvatureSample>, CurvatureError> {
        self.profile
            .samples
            .iter()
            .map(|s| self.sample(s.r))
            .collect()
    }
}

/// Degree-2 Taylor polynomial of |R|²(r + t) along the solution; the
/// closed form is pushed through truncated-series arithmetic with the
/// cascade supplying y(r + t) and y'(r + t).
fn taylor2_r2(s: &ProfileSample) -> TaylorPoly {
    let ord = 2;
    let rt = Series::from_coeffs(vec![s.r, 1.0, 0.0]);
    let yt = Series::from_coeffs(vec![s.y, s.yp, s.ypp / 2.0]);
    let vt = Series::from_coeffs(vec![s.yp, s.ypp, s.yppp / 2.0]);
    let et = yt.exp();
    let one = Series::constant(1.0, ord);
    let pow = |b: &TaylorPoly, k: usize| -> TaylorPoly {
        let mut acc = one.clone();
        for _ in 0..k {
            acc = acc.mul(b);
        }
        acc
    };
    let div = |a: &TaylorPoly, b: &TaylorPoly| a.div(b).expect("nonzero constant term");
    let e2 = et.mul(&et);
    let half = Series::constant(2.0, ord)
        .sub(&div(&rt.mul(&et).scale(8.0), &pow(&vt, 3)))
        .add(&div(&pow(&vt, 4), &pow(&rt, 4).mul(&e2)))
        .add(&div(&one.scale(4.0), &rt.mul(&vt)))
        .add(&div(&rt.mul(&rt).mul(&e2).scale(12.0), &pow(&vt, 6)))
        .sub(&div(&vt.scale(2.0), &pow(&rt, 3).mul(&et)))
        .sub(&div(&et.scale(12.0), &pow(&vt, 4)))
        .add(&div(&pow(&vt, 3).scale(6.0), &pow(&rt, 5).mul(&e2)))
        .sub(&div(&one.scale(12.0), &pow(&rt, 4).mul(&et)))
        .add(&div(&pow(&vt, 2).scale(12.0), &pow(&rt, 6).mul(&e2)));
    half.scale(2.0)
}

/// Metric matrix of the n = 2 tube metric at (x1, x2) and its inverse.
pub fn metric_at(x1: f64, x2: f64, profile: &RadialProfile) -> Result<MetricAt, CurvatureError> {
    let r = (x1 * x1 + x2 * x2).sqrt();
    if !(r > 0.0) || r > profile.r_max() {
        return Err(CurvatureError::Ode(OdeError::OutOfCoverage {
            r,
            r_max: profile.r_max(),
        }));
    }
    let s = profile.eval(r)?;
    let ur = s.yp / r;
    let du = s.ypp - ur;
    let n1 = x1 / r;
    let n2 = x2 / r;
    let g = [
        [ur + du * n1 * n1, du * n1 * n2],
        [du * n1 * n2, ur + du * n2 * n2],
    ];
    let iur = r / s.yp;
    let idu = 1.0 / s.ypp - iur;
    let ginv = [
        [iur + idu * n1 * n1, idu * n1 * n2],
        [idu * n1 * n2, iur + idu * n2 * n2],
    ];
    Ok(MetricAt { g, ginv })
}

/// |R|² at radius r (series route near the origin, closed form beyond).
pub fn riemann_norm2(r: f64, profile: &RadialProfile) -> Result<f64, CurvatureError> {
    CurvatureEvaluator::new(profile)?.r2(r)
}

/// Both routes for ∂_r |R|² at radius r.
pub fn riemann_norm2_derivative(
    r: f64,
    profile: &RadialProfile,
) -> Result<DerivativeRoutes, CurvatureError> {
    CurvatureEvaluator::new(profile)?.dr2_routes(r)
}

/// Radial Laplacian `Δf = f''/y'' + f'/y'` of a radial function.
pub fn radial_laplacian(
    fp: f64,
    fpp: f64,
    r: f64,
    profile: &RadialProfile,
) -> Result<f64, CurvatureError> {
    if !(r > 0.0) || r > profile.r_max() {
        return Err(CurvatureError::Ode(OdeError::OutOfCoverage {
            r,
            r_max: profile.r_max(),
        }));
    }
    let s = profile.eval(r)?;
    Ok(fpp / s.ypp + fp / s.yp)
}

/// TYCZ coefficient profile on the grid; rejects profiles that fail the
/// volume identity.
pub fn a3_profile(profile: &RadialProfile) -> Result<Vec<CurvatureSample>, CurvatureError> {
    CurvatureEvaluator::new(profile)?.samples_on_grid()
}

/// Evaluate the boundary groups A, B, C at the given radii, exactly as
/// printed but with powers of y' and e^y kept in log space.
pub fn boundary_limit_decomposition(
    profile: &RadialProfile,
    radii: &[f64],
) -> Result<Vec<BoundaryDecomposition>, CurvatureError> {
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) || r > profile.r_max() {
                return Err(CurvatureError::Ode(OdeError::OutOfCoverage {
                    r,
                    r_max: profile.r_max(),
                }));
            }
            let s = profile.eval(r)?;
            Ok(decomposition_at(&s))
        })
        .collect()
}

fn decomposition_at(s: &ProfileSample) -> BoundaryDecomposition {
    let r = s.r;
    let y = s.y;
    let f = s.yp.ln();
    let a = -8.0 * (5.0 * f - 2.0 * y).exp() / r.powi(5)
        + 18.0 * (2.0 * f - y).exp() / r.powi(4)
        - 27.0 * (4.0 * f - 2.0 * y).exp() / r.powi(6)
        + 36.0 * (f - y).exp() / r.powi(5)
        - 36.0 * (3.0 * f - 2.0 * y).exp() / r.powi(7);
    let b = -(6.0 * f - 2.0 * y).exp() / r.powi(4) + 3.0 * (3.0 * f - y).exp() / r.powi(3)
        - 3.0 / (r * r);
    let c = -4.0 * r * (y - f).exp() + 24.0 * r * r * (2.0 * y - 4.0 * f).exp()
        - 36.0 * r.powi(3) * (3.0 * y - 7.0 * f).exp()
        + 36.0 * r * (2.0 * y - 5.0 * f).exp()
        - 12.0 * (y - 2.0 * f).exp();
    BoundaryDecomposition { r, a, b, c }
}

/// Extrapolated boundary limits of the decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryLimits {
    pub lim_a: LimitFit,
    pub lim_b: LimitFit,
    pub lim_c: LimitFit,
    /// Extrapolated limit of y'∂_r|R|² = 4(A + B + C).
    pub lim_yp_dr2: LimitFit,
    /// |A| at the deepest sampled radius.
    pub a_at_last: f64,
    /// Reference scale 3/a².
    pub scale: f64,
}

/// Extrapolate A → 0, B → -3/a², C → +3/a² and y'∂_r|R|² → 0.
pub fn boundary_limits(profile: &RadialProfile) -> Result<BoundaryLimits, CurvatureError> {
    if profile.n != 2 {
        return Err(CurvatureError::Ode(OdeError::DimensionNotTwo(profile.n)));
    }
    let (s_a, q_a) = boundary_window(profile, 18.0, 0.6, 3.0, |s| decomposition_at(s).a);
    let (s_b, q_b) = boundary_window(profile, 18.0, 0.6, 3.0, |s| decomposition_at(s).b);
    // C cancels two e^{2y/3}-scale terms; stay shallow enough for f64
    let (s_c, q_c) = boundary_window(profile, 10.0, 0.30, 1.5, |s| decomposition_at(s).c);
    let (s_w, q_w) = boundary_window(profile, 10.0, 0.30, 1.5, |s| {
        let d = decomposition_at(s);
        4.0 * (d.a + d.b + d.c)
    });
    let scale = 3.0 / (profile.a_estimate * profile.a_estimate);
    Ok(BoundaryLimits {
        lim_a: power_law_limit(&s_a, &q_a)?,
        lim_b: power_law_limit(&s_b, &q_b)?,
        lim_c: power_law_limit(&s_c, &q_c)?,
        lim_yp_dr2: power_law_limit(&s_w, &q_w)?,
        a_at_last: q_a.last().copied().unwrap_or(f64::NAN).abs(),
        scale,
    })
}

/// The two auxiliary boundary limits and the divergence witness.
#[derive(Clone, Debug, Serialize)]
pub struct AuxiliaryLimits {
    /// Extrapolated e^y / y'³; the target is 1/(3a).
    pub lim_ey_yp3: LimitFit,
    /// Extrapolated (y'³ - 3 r e^y)/y'²; the target is -3/(2a).
    pub lim_cubic: LimitFit,
    /// (y'³ - 3 r e^y) at the shallow and deep ends of the window: the
    /// combination diverges, ruling out a finite limit.
    pub cubic_first: f64,
    pub cubic_last: f64,
}

/// Boundary limits of e^y/y'³ and (y'³ - 3re^y)/y'².
///
/// The cubic combination is evaluated as `e^f (1 - 3 r e^{y - 3f})` with
/// f = log y'; the subtraction happens at O(s/a) scale instead of between
/// two e^y-sized terms.
pub fn auxiliary_limits(profile: &RadialProfile) -> Result<AuxiliaryLimits, CurvatureError> {
    if profile.n != 2 {
        return Err(CurvatureError::Ode(OdeError::DimensionNotTwo(profile.n)));
    }
    let max_yp = profile.samples.iter().map(|s| s.yp).fold(0.0, f64::max);
    if max_yp <= 1e6 {
        return Err(CurvatureError::Ode(OdeError::NotDeepEnough {
            max_yp,
            need: 1e6,
        }));
    }
    let (s_q, q) = boundary_window(profile, 15.0, 0.55, 3.0, |s| (s.y - 3.0 * s.yp.ln()).exp());
    let cubic = |s: &ProfileSample| {
        let f = s.yp.ln();
        f.exp() * (1.0 - 3.0 * s.r * (s.y - 3.0 * f).exp())
    };
    let (s_c, q_c) = boundary_window(profile, 15.0, 0.45, 3.0, &cubic);
    let grow = |s: &ProfileSample| {
        let f = s.yp.ln();
        (3.0 * f).exp() * (1.0 - 3.0 * s.r * (s.y - 3.0 * f).exp())
    };
    let (_, g) = boundary_window(profile, 10.0, 0.5, 5.0, &grow);
    Ok(AuxiliaryLimits {
        lim_ey_yp3: power_law_limit(&s_q, &q)?,
        lim_cubic: power_law_limit(&s_c, &q_c)?,
        cubic_first: g.first().copied().unwrap_or(f64::NAN),
        cubic_last: g.last().copied().unwrap_or(f64::NAN),
    })
}

/// Constancy analysis of y'∂_r|R|².
#[derive(Clone, Debug, Serialize)]
pub struct LogTrickReport {
    pub is_constant: bool,
    pub max_dev: f64,
    pub mean: f64,
    /// Extrapolated boundary value; 0 for the tube metric.
    pub boundary_value: f64,
}

/// Verdict on a sampled function being constant (absolute deviation).
pub fn constancy_verdict(values: &[f64]) -> (bool, f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let max_dev = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    (max_dev < 1e-8, max_dev, mean)
}

/// Evaluate y'∂_r|R|² on the interior grid and test it for constancy;
/// `Δ|R|² = 0` would force it to be constant.
pub fn log_trick_check(profile: &RadialProfile) -> Result<LogTrickReport, CurvatureError> {
    let idx = profile.interior_indices(0.05, 0.9);
    if idx.len() < 16 {
        return Err(CurvatureError::ProfileRejected(
            "too few interior samples for the constancy check".into(),
        ));
    }
    let values: Vec<f64> = idx
        .iter()
        .map(|&i| {
            let d = decomposition_at(&profile.samples[i]);
            4.0 * (d.a + d.b + d.c)
        })
        .collect();
    let (is_constant, max_dev, mean) = constancy_verdict(&values);
    let lims = boundary_limits(profile)?;
    Ok(LogTrickReport {
        is_constant,
        max_dev,
        mean,
        boundary_value: lims.lim_yp_dr2.limit,
    })
}

/// Origin limit of |R|² by an even polynomial fit on series-route samples.
pub fn origin_r2_limit(profile: &RadialProfile) -> Result<LimitFit, CurvatureError> {
    let ev = CurvatureEvaluator::new(profile)?;
    let hi = 0.08 * profile.a_estimate;
    let rs: Vec<f64> = (1..=24).map(|k| hi * k as f64 / 24.0).collect();
    let qs: Vec<f64> = rs.iter().map(|&r| ev.r2(r)).collect::<Result<_, _>>()?;
    Ok(even_poly_limit(&rs, &qs, 3)?)
}

/// Boundary limit of |R|² by power-law extrapolation of the closed form.
pub fn boundary_r2_limit(profile: &RadialProfile) -> Result<LimitFit, CurvatureError> {
    if profile.n != 2 {
        return Err(CurvatureError::Ode(OdeError::DimensionNotTwo(profile.n)));
    }
    let (s, q) = boundary_window(profile, 12.0, 0.5, 3.0, |smp| r2_closed(smp.r, smp.y, smp.yp));
    Ok(power_law_limit(&s, &q)?)
}

/// CSV rows `r,R2,dR2,d2R2,lapR2,a1,a2,a3,A,B,C` over the grid.
pub fn write_curvature_csv<W: std::io::Write>(
    profile: &RadialProfile,
    w: &mut W,
) -> Result<(), CurvatureError> {
    let ev = CurvatureEvaluator::new(profile)?;
    writeln!(w, "r,R2,dR2,d2R2,lapR2,a1,a2,a3,A,B,C").map_err(io_err)?;
    for s in &profile.samples {
        let c = ev.sample(s.r)?;
        let d = decomposition_at(s);
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.r, c.r2, c.dr2, c.d2r2, c.lapr2, c.a1, c.a2, c.a3, d.a, d.b, d.c
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> CurvatureError {
    CurvatureError::ProfileRejected(format!("write failed: {e}"))
}
