//! Distortion (ε-) functions on model spaces, asymptotic fits of their
//! expansion coefficients, and the weighted section-norm integral on the
//! tube domain.
//!
//! Each model carries an explicit orthonormal family of weighted
//! holomorphic monomials, so ε is an honest basis sum with a controlled
//! tail. The fitted expansion reads `ε(α) = c·(αⁿ + a₁α^{n-1} + a₂α^{n-2})`;
//! the overall constant c absorbs the measure normalization and only the
//! ratios are compared against the curvature formulas. In the sign
//! convention of [`crate::tensor`] the fitted linear coefficient equals
//! σ/2.

use serde::Serialize;
use thiserror::Error;

use num_complex::Complex64 as C64;

use crate::numutil::solve_dense;
use crate::ode::{OdeError, RadialProfile};
use crate::quad::{adaptive_gk, composite_simpson, periodic_trapezoid};

#[derive(Debug, Error)]
pub enum EpsilonError {
    #[error("weighted Bergman space is trivial: αμ = {alpha_mu} <= 1")]
    TrivialSpace { alpha_mu: f64 },
    #[error("point with |z|² = {u} outside the unit ball")]
    OutsideDomain { u: f64 },
    #[error("need at least {required} samples spanning a factor >= {span}, got {actual} spanning {actual_span}")]
    FitRangeTooNarrow {
        required: usize,
        span: f64,
        actual: usize,
        actual_span: f64,
    },
    #[error("singular least-squares system")]
    SingularFit,
    #[error("α must exceed 1 for the section-norm integral, got {0}")]
    AlphaNotAboveOne(f64),
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailed(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// ε value together with its series tail bound and term count.
#[derive(Clone, Copy, Debug)]
pub struct EpsValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Sampled ε values over a weight grid, with the attached fit.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonSeries {
    pub model: String,
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: Option<ExpansionFit>,
}

/// Least-squares fit of `ε(α) = c (αⁿ + a1 α^{n-1} + a2 α^{n-2})`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpansionFit {
    pub c: f64,
    pub a1_hat: f64,
    pub a2_hat: f64,
    /// Root-mean-square relative residual of the fit.
    pub residual: f64,
    pub a1_stderr: f64,
    pub a2_stderr: f64,
}

/// Section-norm report for the tube domain.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectionNormReport {
    pub alpha: f64,
    /// Radially reduced 2-D quadrature (π² × half-disc integral).
    pub reduced_value: f64,
    /// Full 4-D quadrature over the truncated tube.
    pub direct_value: f64,
    pub relative_gap: f64,
    pub finite: bool,
}

/// Settings for the section-norm quadratures.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadSettings {
    pub rtol: f64,
    /// Angular nodes of the reduced route (periodic trapezoid).
    pub theta_nodes: usize,
    /// Radial Simpson panels of the direct route (doubled once for
    /// Richardson).
    pub direct_r_panels: usize,
    pub direct_theta_nodes: usize,
    /// Simpson panels per imaginary-axis integral.
    pub direct_u_panels: usize,
    /// Truncation of the imaginary directions, in units of the boundary
    /// radius; the truncated tails are added back in closed form.
    pub u_cut_in_a: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            rtol: 1e-9,
            theta_nodes: 128,
            direct_r_panels: 72,
            direct_theta_nodes: 72,
            direct_u_panels: 112,
            u_cut_in_a: 40.0,
        }
    }
}

/// ε of flat space with potential |z|²; the monomial sum factorizes over
/// the coordinates, each factor summed with a geometric tail bound.
pub fn epsilon_flat(alpha: f64, n: usize, point: &[C64]) -> f64 {
    assert!(alpha > 0.0);
    assert_eq!(point.len(), n);
    let mut value = 1.0;
    for z in point {
        value *= flat_factor(alpha, z.norm_sqr()).value;
    }
    value
}

fn flat_factor(alpha: f64, u: f64) -> EpsValue {
    // e^{-αu} Σ_k u^k α^{k+1} / (π k!)
    let mut term = alpha / std::f64::consts::PI;
    let mut acc = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= alpha * u / k as f64;
        acc += term;
        let ratio = alpha * u / (k + 1) as f64;
        if ratio < 0.9 {
            let tail = term * ratio / (1.0 - ratio);
            if tail < 1e-16 * acc {
                return EpsValue {
                    value: acc * (-alpha * u).exp(),
                    tail_bound: tail * (-alpha * u).exp(),
                    terms: k + 1,
                };
            }
        }
        if k > 100_000 {
            return EpsValue {
                value: acc * (-alpha * u).exp(),
                tail_bound: f64::NAN,
                terms: k,
            };
        }
    }
}

/// Squared norm of z^k in the disc model: closed Beta-product form.
pub fn disc_monomial_norm2(alpha: f64, mu: f64, k: usize) -> Result<f64, EpsilonError> {
    let am = alpha * mu;
    if am <= 1.0 {
        return Err(EpsilonError::TrivialSpace { alpha_mu: am });
    }
    // μπ k! / [(αμ-1) αμ (αμ+1) ⋯ (αμ+k-1)]
    let mut v = mu * std::f64::consts::PI / (am - 1.0);
    for j in 0..k {
        v *= (j + 1) as f64 / (am + j as f64);
    }
    Ok(v)
}

/// ε of the unit disc with potential -μ log(1 - |z|²).
pub fn epsilon_disc(alpha: f64, mu: f64, point: C64) -> Result<f64, EpsilonError> {
    Ok(epsilon_disc_detailed(alpha, mu, point)?.value)
}

/// Disc ε with tail accounting.
pub fn epsilon_disc_detailed(alpha: f64, mu: f64, point: C64) -> Result<EpsValue, EpsilonError> {
    let am = alpha * mu;
    if am <= 1.0 {
        return Err(EpsilonError::TrivialSpace { alpha_mu: am });
    }
    let u = point.norm_sqr();
    if u >= 1.0 {
        return Err(EpsilonError::OutsideDomain { u });
    }
    // t_k = u^k / ||z^k||²; t_k / t_{k-1} = u (αμ + k - 1)/k
    let mut term = (am - 1.0) / (mu * std::f64::consts::PI);
    let mut acc = term;
    let mut k = 0usize;
    let (value, tail) = loop {
        k += 1;
        term *= u * (am + (k - 1) as f64) / k as f64;
        acc += term;
        let ratio = u * (am + k as f64) / (k + 1) as f64;
        if ratio < 0.95 {
            let tail = term * ratio / (1.0 - ratio);
            if tail < 1e-16 * acc {
                break (acc, tail);
            }
        }
        if k > 500_000 {
            break (acc, f64::NAN);
        }
    };
    let weight = (1.0 - u).powf(am);
    Ok(EpsValue {
        value: value * weight,
        tail_bound: tail * weight,
        terms: k + 1,
    })
}

/// ε of the projective line at level m (Fubini–Study potential log(1+|z|²));
/// a finite sum over the m+1 sections in the affine chart.
pub fn epsilon_projective(m: u32, point: C64) -> f64 {
    let u = point.norm_sqr();
    // Σ_k u^k (m+1)! / (π k! (m-k)!) = (m+1)/π Σ C(m,k) u^k
    let mut binom = 1.0;
    let mut acc = 0.0;
    let mut upow = 1.0;
    for k in 0..=m {
        acc += binom * upow;
        upow *= u;
        binom *= (m - k) as f64 / (k + 1) as f64;
    }
    let weight = (1.0 + u).powi(-(m as i32));
    (m as f64 + 1.0) / std::f64::consts::PI * acc * weight
}

/// Fit `ε(α) = c (αⁿ + a1 α^{n-1} + a2 α^{n-2})` by least squares.
pub fn fit_expansion(alphas: &[f64], values: &[f64], n: usize) -> Result<ExpansionFit, EpsilonError> {
    let m = alphas.len();
    let span = if m > 0 {
        alphas.iter().cloned().fold(f64::MIN, f64::max)
            / alphas.iter().cloned().fold(f64::MAX, f64::min)
    } else {
        0.0
    };
    if m < 6 || span < 4.0 {
        return Err(EpsilonError::FitRangeTooNarrow {
            required: 6,
            span: 4.0,
            actual: m,
            actual_span: span,
        });
    }
    let npow = n as i32;
    let design = |a: f64| [a.powi(npow), a.powi(npow - 1), a.powi(npow - 2)];
    let mut ata = vec![0.0; 9];
    let mut atb = vec![0.0; 3];
    for (&a, &v) in alphas.iter().zip(values.iter()) {
        let row = design(a);
        for i in 0..3 {
            for j in 0..3 {
                ata[i * 3 + j] += row[i] * row[j];
            }
            atb[i] += row[i] * v;
        }
    }
    let mut ata_inv_rhs = atb.clone();
    let mut lhs = ata.clone();
    if !solve_dense(3, &mut lhs, &mut ata_inv_rhs) {
        return Err(EpsilonError::SingularFit);
    }
    let p = ata_inv_rhs;
    if p[0].abs() < 1e-300 {
        return Err(EpsilonError::SingularFit);
    }
    // residuals and parameter covariance
    let mut ss = 0.0;
    let mut rel2 = 0.0;
    for (&a, &v) in alphas.iter().zip(values.iter()) {
        let row = design(a);
        let fit = row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
        ss += (fit - v) * (fit - v);
        rel2 += ((fit - v) / v) * ((fit - v) / v);
    }
    let dof = (m as f64 - 3.0).max(1.0);
    let s2 = ss / dof;
    // diagonal of (XᵀX)⁻¹ via unit solves
    let mut var = [0.0; 3];
    for (i, v) in var.iter_mut().enumerate() {
        let mut rhs = [0.0; 3];
        rhs[i] = 1.0;
        let mut lhs = ata.clone();
        let mut sol = rhs.to_vec();
        if !solve_dense(3, &mut lhs, &mut sol) {
            return Err(EpsilonError::SingularFit);
        }
        *v = (s2 * sol[i]).max(0.0);
    }
    let a1_hat = p[1] / p[0];
    let a2_hat = p[2] / p[0];
    Ok(ExpansionFit {
        c: p[0],
        a1_hat,
        a2_hat,
        residual: (rel2 / m as f64).sqrt(),
        a1_stderr: (var[1].sqrt() + a1_hat.abs() * var[0].sqrt()) / p[0].abs(),
        a2_stderr: (var[2].sqrt() + a2_hat.abs() * var[0].sqrt()) / p[0].abs(),
    })
}

/// Sample the flat model over a weight grid (evaluated at the origin;
/// translation invariance is a tested invariant).
pub fn flat_series(alphas: &[f64], n: usize) -> Result<EpsilonSeries, EpsilonError> {
    let origin = vec![C64::new(0.0, 0.0); n];
    let values: Vec<f64> = alphas.iter().map(|&a| epsilon_flat(a, n, &origin)).collect();
    let fit = fit_expansion(alphas, &values, n)?;
    Ok(EpsilonSeries {
        model: format!("flat-n{n}"),
        alphas: alphas.to_vec(),
        values,
        fit: Some(fit),
    })
}

/// Sample the disc model over a weight grid.
pub fn disc_series(alphas: &[f64], mu: f64) -> Result<EpsilonSeries, EpsilonError> {
    let values: Vec<f64> = alphas
        .iter()
        .map(|&a| epsilon_disc(a, mu, C64::new(0.0, 0.0)))
        .collect::<Result<_, _>>()?;
    let fit = fit_expansion(alphas, &values, 1)?;
    Ok(EpsilonSeries {
        model: format!("disc-mu{mu}"),
        alphas: alphas.to_vec(),
        values,
        fit: Some(fit),
    })
}

/// Sample the projective line over integer levels.
pub fn projective_series(levels: &[u32]) -> Result<EpsilonSeries, EpsilonError> {
    let alphas: Vec<f64> = levels.iter().map(|&m| m as f64).collect();
    let values: Vec<f64> = levels
        .iter()
        .map(|&m| epsilon_projective(m, C64::new(0.0, 0.0)))
        .collect();
    let fit = fit_expansion(&alphas, &values, 1)?;
    Ok(EpsilonSeries {
        model: "projective-line".into(),
        alphas,
        values,
        fit: Some(fit),
    })
}

/// CSV rows `alpha,epsilon`.
pub fn write_epsilon_csv<W: std::io::Write>(
    series: &EpsilonSeries,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "alpha,epsilon")?;
    for (a, v) in series.alphas.iter().zip(series.values.iter()) {
        writeln!(w, "{a:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Numeric check of the fiber identity `∫ du / (u²/4 + c) = 2π/√c`:
/// quadrature on a finite window plus the closed-form tails.
pub fn lorentzian_reduction_check(c: f64) -> (f64, f64) {
    assert!(c > 0.0);
    let sc = c.sqrt();
    let cut = 1e4 * sc;
    let body = adaptive_gk(|u| 1.0 / (u * u / 4.0 + c), -cut, cut, 1e-13, 0.0, 4000);
    let tail = 2.0 * (2.0 / sc) * (std::f64::consts::FRAC_PI_2 - (cut / (2.0 * sc)).atan());
    (body.value + tail, 2.0 * std::f64::consts::PI / sc)
}

/// Truncated fiber integral `∫_{-U}^{U} du / ((x-4a)²/4 + u²/4)` by
/// Simpson panels, plus the closed-form tail beyond the truncation.
fn fiber_integral(x: f64, a: f64, u_cut: f64, panels: usize) -> f64 {
    let c = (x - 4.0 * a) * (x - 4.0 * a) / 4.0;
    let body = composite_simpson(|u| 1.0 / (c + u * u / 4.0), -u_cut, u_cut, panels);
    let sc = c.sqrt();
    let tail = 2.0 * (2.0 / sc) * (std::f64::consts::FRAC_PI_2 - (u_cut / (2.0 * sc)).atan());
    body + tail
}

/// Weighted squared norm of the section ∏ 1/(z_j - 2a) over the tube
/// domain (n = 2), computed two independent ways.
///
/// * reduced: the imaginary directions are integrated in closed form,
///   leaving `π² ∫_D e^{(1-α)y(r)} / ((4a-x₁)(4a-x₂)) dx` over the disc
///   of radius a in x (that is, Re z in the half-disc of radius a/2).
/// * direct: a 4-D tensor-product quadrature over the tube truncated at
///   |u_j| ≤ U, with the truncated tails restored in closed form and one
///   Richardson refinement in the radial and fiber resolutions.
pub fn calabi_section_norm(
    alpha: f64,
    profile: &RadialProfile,
    settings: &QuadSettings,
) -> Result<SectionNormReport, EpsilonError> {
    if alpha <= 1.0 {
        return Err(EpsilonError::AlphaNotAboveOne(alpha));
    }
    if profile.n != 2 {
        return Err(EpsilonError::Ode(OdeError::DimensionNotTwo(profile.n)));
    }
    let a = profile.a_estimate;
    // truncate where the weight is negligible
    let y_cap = 50.0 / (alpha - 1.0);
    let r_cut = {
        let mut idx = profile.samples.partition_point(|s| s.y < profile.y0 + y_cap);
        idx = idx.min(profile.samples.len() - 1);
        profile.samples[idx].r
    };
    let weight = |r: f64| -> f64 {
        let y = profile.eval(r).map(|s| s.y).unwrap_or(f64::INFINITY);
        ((1.0 - alpha) * y).exp()
    };

    // ---- reduced route ----
    let theta_n = settings.theta_nodes;
    let reduced_inner = |r: f64| -> f64 {
        periodic_trapezoid(
            |th| {
                let x1 = r * th.cos();
                let x2 = r * th.sin();
                1.0 / ((4.0 * a - x1) * (4.0 * a - x2))
            },
            theta_n,
        )
    };
    let outer = adaptive_gk(
        |r| {
            if r <= 0.0 {
                return 0.0;
            }
            weight(r) * r * reduced_inner(r)
        },
        0.0,
        r_cut,
        settings.rtol,
        0.0,
        4000,
    );
    if !outer.converged {
        return Err(EpsilonError::QuadratureFailed(format!(
            "reduced route: {} panels insufficient (err {:e})",
            4000, outer.error
        )));
    }
    let reduced_value = std::f64::consts::PI * std::f64::consts::PI * outer.value;

    // ---- direct route ----
    let u_cut = settings.u_cut_in_a * a;
    let direct_at = |r_panels: usize, u_panels: usize| -> f64 {
        let theta_nodes = settings.direct_theta_nodes;
        let radial = |r: f64| -> f64 {
            if r <= 0.0 {
                return 0.0;
            }
            let ang = periodic_trapezoid(
                |th| {
                    let x1 = r * th.cos();
                    let x2 = r * th.sin();
                    fiber_integral(x1, a, u_cut, u_panels)
                        * fiber_integral(x2, a, u_cut, u_panels)
                },
                theta_nodes,
            );
            weight(r) * r * ang
        };
        composite_simpson(radial, 0.0, r_cut, r_panels) / 16.0
    };
    let coarse = direct_at(settings.direct_r_panels, settings.direct_u_panels);
    let fine = direct_at(settings.direct_r_panels * 2, settings.direct_u_panels * 2);
    // Simpson is 4th order; one Richardson step
    let direct_value = (16.0 * fine - coarse) / 15.0;
    let refine_move = (fine - coarse).abs() / fine.abs().max(1e-300);

    let relative_gap = (reduced_value - direct_value).abs() / reduced_value.abs().max(1e-300);
    let finite = reduced_value.is_finite()
        && direct_value.is_finite()
        && outer.converged
        && refine_move < 1e-3;
    Ok(SectionNormReport {
        alpha,
        reduced_value,
        direct_value,
        relative_gap,
        finite,
    })
}

/// Max of the reduced integrand over a sweep of the closed half-disc;
/// finiteness is part of the section-norm argument.
pub fn reduced_integrand_max(alpha: f64, profile: &RadialProfile) -> Result<f64, EpsilonError> {
    if alpha <= 1.0 {
        return Err(EpsilonError::AlphaNotAboveOne(alpha));
    }
    let a = profile.a_estimate;
    let mut worst: f64 = 0.0;
    for s in &profile.samples {
        let w = ((1.0 - alpha) * s.y).exp();
        for th in [0.0, 0.7, 1.9, 3.3, 5.1] {
            let x1 = s.r * f64::cos(th);
            let x2 = s.r * f64::sin(th);
            worst = worst.max(w / ((4.0 * a - x1) * (4.0 * a - x2)));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{solve_profile, SolverConfig};
    use crate::quad::adaptive_gk;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn flat_epsilon_at_origin_is_single_term() {
        // 1/||1||² with ||1||² = ∫ e^{-α|z|²} dV = π/α
        let norm1 = adaptive_gk(
            |t| (-2.0 * t).exp() * PI, // shell integral: ∫_0^∞ e^{-αt} π dt
            0.0,
            40.0,
            1e-12,
            0.0,
            2000,
        );
        let eps = epsilon_flat(2.0, 1, &[C64::new(0.0, 0.0)]);
        assert_relative_eq!(eps, 1.0 / norm1.value, max_relative = 1e-11);
    }

    #[test]
    fn flat_epsilon_is_translation_invariant() {
        for z in [C64::new(0.0, 0.0), C64::new(1.0, -0.5), C64::new(0.0, 2.0)] {
            let e = epsilon_flat(1.7, 1, &[z]);
            assert_relative_eq!(e, 1.7 / PI, max_relative = 1e-12);
        }
        let e2 = epsilon_flat(2.5, 3, &[C64::new(0.3, 0.1), C64::new(0.0, 1.0), C64::new(0.5, 0.5)]);
        assert_relative_eq!(e2, (2.5 / PI).powi(3), max_relative = 1e-12);
    }

    #[test]
    fn flat_epsilon_is_linear_in_alpha() {
        let z = [C64::new(0.8, 0.3)];
        for k in 1..=20 {
            let a = k as f64;
            assert_relative_eq!(epsilon_flat(a, 1, &z) / a, 1.0 / PI, max_relative = 1e-12);
        }
    }

    #[test]
    fn disc_norms_match_quadrature_oracle() {
        // ||z^k||² = μπ ∫ t^k (1-t)^{αμ-2} dt, adaptive quadrature oracle
        let (alpha, mu) = (2.5, 2.0);
        for k in [0usize, 1, 3, 7] {
            let oracle = adaptive_gk(
                |t| t.powi(k as i32) * (1.0 - t).powf(alpha * mu - 2.0),
                0.0,
                1.0,
                1e-12,
                0.0,
                4000,
            );
            let closed = disc_monomial_norm2(alpha, mu, k).unwrap();
            assert_relative_eq!(closed, mu * PI * oracle.value, max_relative = 1e-9);
        }
    }

    #[test]
    fn disc_epsilon_is_constant_in_the_point() {
        let (alpha, mu) = (3.0, 1.5);
        let expect = (alpha * mu - 1.0) / (mu * PI);
        for z in [
            C64::new(0.0, 0.0),
            C64::new(0.5, 0.2),
            C64::new(-0.1, 0.85),
        ] {
            let e = epsilon_disc(alpha, mu, z).unwrap();
            assert_relative_eq!(e, expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn disc_below_threshold_is_an_error() {
        assert!(matches!(
            epsilon_disc(0.4, 2.0, C64::new(0.0, 0.0)),
            Err(EpsilonError::TrivialSpace { .. })
        ));
    }

    #[test]
    fn disc_tail_bound_controls_truncation() {
        let (alpha, mu) = (2.0, 2.0);
        let z = C64::new(0.6, 0.5);
        let d = epsilon_disc_detailed(alpha, mu, z).unwrap();
        // extending the sum cannot move the value by more than the bound
        let expect = (alpha * mu - 1.0) / (mu * PI);
        assert!((d.value - expect).abs() <= d.tail_bound.max(1e-13 * expect));
    }

    #[test]
    fn projective_epsilon_is_constant_and_linear_in_level() {
        for m in 1..=12u32 {
            let at0 = epsilon_projective(m, C64::new(0.0, 0.0));
            for z in [C64::new(0.4, 0.0), C64::new(-1.3, 2.0)] {
                assert_relative_eq!(epsilon_projective(m, z), at0, max_relative = 1e-12);
            }
            assert_relative_eq!(at0, (m as f64 + 1.0) / PI, max_relative = 1e-13);
        }
        // second finite difference vanishes
        for m in 1..=10u32 {
            let f = |m: u32| epsilon_projective(m, C64::new(0.2, 0.1));
            let second = f(m + 2) - 2.0 * f(m + 1) + f(m);
            assert!(second.abs() < 1e-12, "m = {m}: Δ² = {second:e}");
        }
    }

    #[test]
    fn basis_independence_under_unitary_mixing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12345);
        let kmax = 24usize;
        let alpha: f64 = 2.0;
        // random unitary by Gram–Schmidt on a random complex matrix
        let mut q: Vec<Vec<C64>> = (0..kmax)
            .map(|_| {
                (0..kmax)
                    .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect()
            })
            .collect();
        for i in 0..kmax {
            for j in 0..i {
                let mut proj = C64::new(0.0, 0.0);
                for t in 0..kmax {
                    proj += q[i][t] * q[j][t].conj();
                }
                for t in 0..kmax {
                    let qj = q[j][t];
                    q[i][t] -= proj * qj;
                }
            }
            let norm: f64 = q[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for t in 0..kmax {
                q[i][t] /= norm;
            }
        }
        let z = C64::new(0.9, -0.4);
        let u = z.norm_sqr();
        // orthonormal monomials e_k(z) = z^k √(α^{k+1}/(π k!))
        let mut e = Vec::with_capacity(kmax);
        let mut fact = 1.0;
        for k in 0..kmax {
            if k > 0 {
                fact *= k as f64;
            }
            let nrm = (alpha.powi(k as i32 + 1) / (PI * fact)).sqrt();
            e.push(z.powu(k as u32) * nrm);
        }
        let direct: f64 = e.iter().map(|v| v.norm_sqr()).sum();
        let mixed: f64 = (0..kmax)
            .map(|j| {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..kmax {
                    s += q[j][k] * e[k];
                }
                s.norm_sqr()
            })
            .sum();
        let weight = (-alpha * u).exp();
        assert!(
            (direct - mixed).abs() * weight < 1e-12 * direct.abs() * weight,
            "direct {direct} vs mixed {mixed}"
        );
    }

    #[test]
    fn fit_on_flat_data_is_exact() {
        let alphas = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0];
        let s = flat_series(&alphas, 1).unwrap();
        let fit = s.fit.unwrap();
        assert!(fit.residual < 1e-12, "residual {:e}", fit.residual);
        assert!(fit.a1_hat.abs() < 1e-10);
        assert!(fit.a2_hat.abs() < 1e-10);
        assert_relative_eq!(fit.c, 1.0 / PI, max_relative = 1e-12);
    }

    #[test]
    fn fit_recovers_projective_and_disc_lines() {
        let levels: Vec<u32> = (1..=12).collect();
        let fit = projective_series(&levels).unwrap().fit.unwrap();
        assert_relative_eq!(fit.a1_hat, 1.0, max_relative = 1e-8); // σ/2 = +1
        assert!(fit.a2_hat.abs() < 1e-8);

        let alphas = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0];
        let fit = disc_series(&alphas, 2.0).unwrap().fit.unwrap();
        assert_relative_eq!(fit.a1_hat, -0.5, max_relative = 1e-8); // σ/2 = -1/μ
        assert!(fit.a2_hat.abs() < 1e-8);
    }

    #[test]
    fn fit_requires_a_wide_grid() {
        let alphas = [1.0, 1.1, 1.2, 1.3, 1.4, 1.5];
        let values = [1.0; 6];
        assert!(matches!(
            fit_expansion(&alphas, &values, 1),
            Err(EpsilonError::FitRangeTooNarrow { .. })
        ));
    }

    #[test]
    fn fit_stability_on_the_upper_half() {
        let alphas = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0];
        let s = disc_series(&alphas, 1.5).unwrap();
        let full = s.fit.unwrap();
        let half = fit_expansion(&s.alphas[6..], &s.values[6..], 1).unwrap();
        assert!(
            (half.a1_hat - full.a1_hat).abs() <= 10.0 * full.a1_stderr.max(1e-12),
            "moved {:e} vs stderr {:e}",
            (half.a1_hat - full.a1_hat).abs(),
            full.a1_stderr
        );
    }

    #[test]
    fn lorentzian_identity_across_scales() {
        for c in [0.25, 1.0, 2.0, 7.5, 40.0] {
            let (computed, exact) = lorentzian_reduction_check(c);
            assert_relative_eq!(computed, exact, max_relative = 1e-10);
        }
        let (computed, _) = lorentzian_reduction_check(1.0);
        assert_relative_eq!(computed, 2.0 * PI, max_relative = 1e-10);
    }

    fn profile() -> &'static RadialProfile {
        static P: OnceLock<RadialProfile> = OnceLock::new();
        P.get_or_init(|| solve_profile(&SolverConfig::default()).unwrap())
    }

    #[test]
    fn section_norm_reduced_vs_direct() {
        let p = profile();
        let settings = QuadSettings::default();
        for alpha in [2.0, 3.0] {
            let rep = calabi_section_norm(alpha, p, &settings).unwrap();
            assert!(rep.finite, "α = {alpha} not finite: {rep:?}");
            assert!(rep.reduced_value > 0.0);
            assert!(
                rep.relative_gap <= 1e-4,
                "α = {alpha}: gap {:e}",
                rep.relative_gap
            );
        }
    }

    #[test]
    fn section_norm_rejects_alpha_at_or_below_one() {
        let p = profile();
        assert!(matches!(
            calabi_section_norm(1.0, p, &QuadSettings::default()),
            Err(EpsilonError::AlphaNotAboveOne(_))
        ));
    }

    #[test]
    fn reduced_integrand_is_bounded() {
        let p = profile();
        let worst = reduced_integrand_max(2.0, p).unwrap();
        assert!(worst.is_finite());
        // the weight dominates the bounded rational factor
        let a = p.a_estimate;
        assert!(worst <= 1.0 / (3.0 * a * 3.0 * a) * 1.001, "max {worst}");
    }
}
