//! The cross-module verification suite: every headline numeric claim,
//! each pinned to its tolerance, grouped into thirteen criteria. The
//! acceptance tests and the `verify-all` subcommand both run this module,
//! so there is exactly one definition of "passing".

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{
    self, a3_profile, auxiliary_limits, boundary_limits, boundary_r2_limit, log_trick_check,
    origin_r2_limit, r2_closed, CurvatureEvaluator,
};
use crate::epsilon::{
    calabi_section_norm, disc_series, flat_series, lorentzian_reduction_check, projective_series,
    QuadSettings,
};
use crate::ode::{estimate_boundary, solve_profile, RadialProfile, SolverConfig};
use crate::report::CheckReport;
use crate::series::{calabi_series, limit_origin_expressions, pqs_series, series_div, series_exp, series_mul, Series};
use crate::tensor::{
    curvature_from_potential, lu_scalars, model_space_data, tycz_a3_pipeline_ke, tycz_coeffs_ke,
    PotentialFamily, RadialModel,
};
use num_complex::Complex64 as C64;

/// Settings for a verification run.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub solver: SolverConfig,
    /// Initial values swept by the series criteria.
    pub y0_sweep: Vec<f64>,
    pub seed: u64,
    pub quad: QuadSettings,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            solver: SolverConfig::default(),
            y0_sweep: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            seed: 7,
            quad: QuadSettings::default(),
        }
    }
}

/// One criterion: a title and its sub-checks.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

impl CriterionResult {
    fn new(id: &str, title: &str, checks: Vec<CheckReport>) -> Self {
        CriterionResult {
            id: id.into(),
            title: title.into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    /// The one-line rendering used by the suite output.
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        if failed == 0 {
            format!("[{status}] {}: {} ({} checks)", self.id, self.title, self.checks.len())
        } else {
            format!(
                "[{status}] {}: {} ({} of {} checks failed)",
                self.id,
                self.title,
                failed,
                self.checks.len()
            )
        }
    }
}

pub fn all_pass(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.pass)
}

/// Run the full suite. One default profile is solved and shared by the
/// curvature, tensor and section-norm criteria; the criteria themselves
/// fan out across the current rayon pool (results are collected in
/// order, so output and values are independent of the thread count).
pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    use rayon::prelude::*;
    let profile = solve_profile(&cfg.solver).expect("reference profile must solve");
    let p = &profile;
    let jobs: Vec<Box<dyn Fn() -> CriterionResult + Send + Sync>> = vec![
        Box::new(move || c01_series_coefficients(cfg)),
        Box::new(move || c02_p_series(cfg)),
        Box::new(move || c03_origin_limits(cfg)),
        Box::new(move || c04_curvature_limits(p)),
        Box::new(move || c05_boundary_decomposition(p)),
        Box::new(move || c06_auxiliary_limits(p)),
        Box::new(move || c07_nonvanishing_witness(p)),
        Box::new(move || c08_oracle_equivalence(p)),
        Box::new(move || c09_ke_identities(p)),
        Box::new(c10_model_dichotomy),
        Box::new(c11_epsilon_fits),
        Box::new(move || c12_section_norms(p, &cfg.quad)),
        Box::new(move || c13_property_battery(cfg, p)),
    ];
    jobs.par_iter().map(|job| job()).collect()
}

fn c01_series_coefficients(cfg: &VerifyConfig) -> CriterionResult {
    let _ = cfg;
    let mut checks = Vec::new();
    for &y0 in &[-1.0, 0.0, 1.0] {
        let y = calabi_series(y0, 2, 12).expect("series");
        let targets = [
            (2usize, (y0 / 2.0).exp() / 2.0, "b2 = e^{y0/2}/2"),
            (4, y0.exp() / 32.0, "b4 = e^{y0}/32"),
            (6, 7.0 * (1.5 * y0).exp() / 2304.0, "b6 = 7e^{3y0/2}/2304"),
        ];
        for (k, want, claim) in targets {
            checks.push(CheckReport::relative(
                "C01",
                &format!("{claim} at y0 = {y0}"),
                want,
                y.coeffs[k],
                1e-12,
            ));
        }
    }
    CriterionResult::new("C01", "origin series coefficients", checks)
}

fn c02_p_series(cfg: &VerifyConfig) -> CriterionResult {
    let _ = cfg;
    let mut checks = Vec::new();
    for &y0 in &[-1.0, 0.0, 1.0] {
        let y = calabi_series(y0, 2, 12).expect("series");
        let t = pqs_series(&y).expect("pqs");
        checks.push(CheckReport::relative(
            "C02",
            &format!("c2 = e^{{y0}}/8 at y0 = {y0}"),
            y0.exp() / 8.0,
            t.p.coeffs[2],
            1e-12,
        ));
        checks.push(CheckReport::relative(
            "C02",
            &format!("c4 = 7e^{{3y0/2}}/384 at y0 = {y0}"),
            7.0 * (1.5 * y0).exp() / 384.0,
            t.p.coeffs[4],
            1e-12,
        ));
    }
    CriterionResult::new("C02", "quotient-series coefficients", checks)
}

fn c03_origin_limits(cfg: &VerifyConfig) -> CriterionResult {
    let mut checks = Vec::new();
    let mut l1s = Vec::new();
    for &y0 in &cfg.y0_sweep {
        let y = calabi_series(y0, 2, 12).expect("series");
        let lims = limit_origin_expressions(&y).expect("limits");
        l1s.push((lims.l1, lims.l2));
        checks.push(CheckReport::relative(
            "C03",
            &format!("first origin limit = -9/2 at y0 = {y0}"),
            -4.5,
            lims.l1,
            1e-10,
        ));
        checks.push(CheckReport::relative(
            "C03",
            &format!("second origin limit = 3/16 at y0 = {y0}"),
            3.0 / 16.0,
            lims.l2,
            1e-10,
        ));
    }
    let spread = l1s
        .iter()
        .map(|(l1, l2)| (l1 + 4.5).abs().max((l2 - 0.1875).abs()))
        .fold(0.0_f64, f64::max);
    checks.push(CheckReport::absolute(
        "C03",
        "limits independent of y0 across the sweep",
        0.0,
        spread,
        1e-10,
    ));
    CriterionResult::new("C03", "origin limits by series cancellation", checks)
}

fn c04_curvature_limits(profile: &RadialProfile) -> CriterionResult {
    let orig = origin_r2_limit(profile).expect("origin fit");
    let bnd = boundary_r2_limit(profile).expect("boundary fit");
    let checks = vec![
        CheckReport::relative("C04", "lim |R|^2 as r->0 = 3/2", 1.5, orig.limit, 1e-6),
        CheckReport::relative(
            "C04",
            "lim |R|^2 as r->a = 4/3",
            4.0 / 3.0,
            bnd.limit,
            1e-4,
        ),
        CheckReport::condition(
            "C04",
            "origin value strictly exceeds boundary value",
            orig.limit - bnd.limit,
            orig.limit > bnd.limit,
        ),
    ];
    CriterionResult::new("C04", "curvature-norm limits", checks)
}

fn c05_boundary_decomposition(profile: &RadialProfile) -> CriterionResult {
    let lims = boundary_limits(profile).expect("boundary limits");
    let scale = lims.scale; // 3/a²
    let checks = vec![
        CheckReport::absolute(
            "C05",
            "lim A = 0 (vs 3/a² scale)",
            0.0,
            lims.lim_a.limit.abs(),
            1e-3 * scale,
        ),
        CheckReport::absolute(
            "C05",
            "|A| at the deepest sample stays below 1e-3·3/a²",
            0.0,
            lims.a_at_last,
            1e-3 * scale,
        ),
        CheckReport::relative("C05", "lim B = -3/a²", -scale, lims.lim_b.limit, 1e-3),
        CheckReport::relative("C05", "lim C = +3/a²", scale, lims.lim_c.limit, 1e-3),
        CheckReport::absolute(
            "C05",
            "lim y'∂_r|R|² = 0 (vs 4·3/a² scale)",
            0.0,
            lims.lim_yp_dr2.limit.abs(),
            4e-3 * scale,
        ),
    ];
    CriterionResult::new("C05", "boundary decomposition limits", checks)
}

fn c06_auxiliary_limits(profile: &RadialProfile) -> CriterionResult {
    let aux = auxiliary_limits(profile).expect("aux limits");
    let est = estimate_boundary(profile).expect("boundary estimate");
    let a = profile.a_estimate;
    let checks = vec![
        CheckReport::relative(
            "C06",
            "lim e^y/y'^3 = 1/(3a)",
            1.0 / (3.0 * a),
            aux.lim_ey_yp3.limit,
            1e-4,
        ),
        CheckReport::relative(
            "C06",
            "lim (y'^3 - 3re^y)/y'^2 = -3/(2a)",
            -1.5 / a,
            aux.lim_cubic.limit,
            1e-3,
        ),
        CheckReport::absolute(
            "C06",
            "independent boundary-radius estimates agree",
            0.0,
            est.spread,
            1e-3,
        ),
        CheckReport::condition(
            "C06",
            "(y'^3 - 3re^y) diverges (no finite limit)",
            aux.cubic_last,
            aux.cubic_last < -1e6 && aux.cubic_last.abs() > 1e4 * aux.cubic_first.abs(),
        ),
    ];
    CriterionResult::new("C06", "auxiliary boundary limits", checks)
}

fn c07_nonvanishing_witness(profile: &RadialProfile) -> CriterionResult {
    let samples = a3_profile(profile).expect("a3 profile");
    let (best, sup) = samples
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.a3.abs()))
        .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let err = samples[best].a3_err_bound;
    let log = log_trick_check(profile).expect("log trick");
    let checks = vec![
        CheckReport::condition(
            "C07",
            &format!(
                "sup |a3| = {sup:.6} exceeds 10x its error bound {err:.2e} (at r = {:.4})",
                samples[best].r
            ),
            sup,
            sup > 10.0 * err,
        ),
        CheckReport::condition(
            "C07",
            "y'∂_r|R|² is not constant",
            log.max_dev,
            !log.is_constant && log.max_dev > 1e-8,
        ),
    ];
    CriterionResult::new("C07", "nonvanishing third coefficient", checks)
}

fn c08_oracle_equivalence(profile: &RadialProfile) -> CriterionResult {
    let ev = CurvatureEvaluator::new(profile).expect("evaluator");
    let family = PotentialFamily::TubeRadial { profile };
    let a = profile.a_estimate;
    let mut worst_r2: f64 = 0.0;
    let mut worst_dr2: f64 = 0.0;
    let mut worst_a3: f64 = 0.0;
    for k in 0..20 {
        let r = (0.12 + 0.76 * k as f64 / 19.0) * a;
        let r = r.min(profile.r_max() * 0.999);
        let th = 0.37 + k as f64;
        let z = [
            C64::new(r * th.cos() / 2.0, 0.1 * k as f64),
            C64::new(r * th.sin() / 2.0, -0.2),
        ];
        let d = curvature_from_potential(&family, &z).expect("tensor data");
        let s = profile.eval(r).expect("eval");
        let closed = r2_closed(r, s.y, s.yp);
        worst_r2 = worst_r2.max((d.r2 - closed).abs() / closed.abs());

        let routes = ev.dr2_routes(r).expect("routes");
        worst_dr2 = worst_dr2.max(
            (routes.printed - routes.differentiated).abs() / routes.printed.abs().max(1.0),
        );

        let (_, d1, d2) = ev.r2_d1_d2(r).expect("derivs");
        let lap = curvature::radial_laplacian(d1, d2, r, profile).expect("laplacian");
        let lemma = tycz_coeffs_ke(d.r2, lap, -1.0, 2).a3;
        let pipe = tycz_a3_pipeline_ke(&d, lap).expect("pipeline");
        worst_a3 = worst_a3.max((pipe - lemma).abs() / lemma.abs().max(1e-300));
    }
    let checks = vec![
        CheckReport::absolute(
            "C08",
            "contraction |R|² matches the closed form (20 radii, relative)",
            0.0,
            worst_r2,
            1e-6,
        ),
        CheckReport::absolute(
            "C08",
            "both ∂_r|R|² routes agree (relative to max(1, value))",
            0.0,
            worst_dr2,
            1e-7,
        ),
        CheckReport::absolute(
            "C08",
            "a3 via contractions matches the reduced formula (relative)",
            0.0,
            worst_a3,
            1e-9,
        ),
    ];
    CriterionResult::new("C08", "independent-route equivalence", checks)
}

fn c09_ke_identities(profile: &RadialProfile) -> CriterionResult {
    let family = PotentialFamily::TubeRadial { profile };
    let a = profile.a_estimate;
    let mut worst_ric: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    let mut worst_ric2: f64 = 0.0;
    let mut worst_ricrr: f64 = 0.0;
    let mut worst_rricric: f64 = 0.0;
    let mut worst_sigma3: f64 = 0.0;
    let mut worst_divdiv: f64 = 0.0;
    for k in 0..20 {
        let r = (0.1 + 0.8 * k as f64 / 19.0) * a;
        let r = r.min(profile.r_max() * 0.999);
        let th = 1.1 + 0.9 * k as f64;
        let z = [
            C64::new(r * th.cos() / 2.0, 0.4),
            C64::new(r * th.sin() / 2.0, 1.3),
        ];
        let d = curvature_from_potential(&family, &z).expect("tensor data");
        let dev = d
            .ric
            .iter()
            .zip(d.g.iter())
            .map(|(rc, g)| (rc + g).norm())
            .fold(0.0_f64, f64::max);
        worst_ric = worst_ric.max(dev);
        worst_sigma = worst_sigma.max((d.sigma + 2.0).abs());
        worst_ric2 = worst_ric2.max((d.ric2 - 2.0).abs());
        let lu = lu_scalars(&d).expect("lu");
        worst_ricrr = worst_ricrr.max((lu.ric_rr + d.r2).abs());
        worst_rricric = worst_rricric.max((lu.r_ricric + 2.0).abs());
        worst_sigma3 = worst_sigma3.max((lu.sigma3 + 2.0).abs());
        worst_divdiv = worst_divdiv.max(lu.divdiv_r_ric.abs());
    }
    let c = |claim: &str, worst: f64| CheckReport::absolute("C09", claim, 0.0, worst, 1e-8);
    let checks = vec![
        c("max |Ric + g| over 20 radii", worst_ric),
        c("σ = -2", worst_sigma),
        c("|Ric|² = 2", worst_ric2),
        c("Ric(R,R) = -|R|²", worst_ricrr),
        c("R(Ric,Ric) = -2", worst_rricric),
        c("σ₃(Ric) = -2", worst_sigma3),
        c("div div (R, Ric) = 0", worst_divdiv),
    ];
    CriterionResult::new("C09", "Kähler–Einstein identities on the tube", checks)
}

fn c10_model_dichotomy() -> CriterionResult {
    let mut checks = Vec::new();
    for n in [2usize, 3, 4] {
        let flat = model_space_data(RadialModel::Flat { scale: 1.0 }, n, 1.0).expect("flat");
        checks.push(CheckReport::absolute(
            "C10",
            &format!("flat n = {n}: a2 = 0"),
            0.0,
            flat.a2.abs(),
            1e-12,
        ));
        checks.push(CheckReport::absolute(
            "C10",
            &format!("flat n = {n}: a3 = 0"),
            0.0,
            flat.a3.abs(),
            1e-12,
        ));
    }
    for (name, model) in [
        ("hyperbolic", RadialModel::Hyperbolic { mu: 1.0 }),
        ("projective", RadialModel::Projective { mu: 1.0 }),
    ] {
        let m2 = model_space_data(model, 2, 1.0).expect("model n=2");
        checks.push(CheckReport::absolute(
            "C10",
            &format!("{name} n = 2: a3 = 0"),
            0.0,
            m2.a3.abs(),
            1e-12,
        ));
        let m3 = model_space_data(model, 3, 1.0).expect("model n=3");
        let expected_sign = -m3.lambda; // a3 = -λ(n-2)(positive)/48
        checks.push(CheckReport::condition(
            "C10",
            &format!(
                "{name} n = 3: a3 = {:.4} nonzero with sign of -λ(n-2)",
                m3.a3
            ),
            m3.a3,
            m3.a3.abs() > 1e-3 && (m3.a3 * expected_sign) > 0.0,
        ));
    }
    CriterionResult::new("C10", "model-space dichotomy", checks)
}

fn c11_epsilon_fits() -> CriterionResult {
    let mut checks = Vec::new();
    let alphas = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0];

    let flat = flat_series(&alphas, 1).expect("flat series").fit.unwrap();
    checks.push(CheckReport::absolute(
        "C11",
        "flat n = 1: fit residual",
        0.0,
        flat.residual,
        1e-12,
    ));
    checks.push(CheckReport::absolute("C11", "flat: a1 = 0", 0.0, flat.a1_hat.abs(), 1e-9));
    checks.push(CheckReport::absolute("C11", "flat: a2 = 0", 0.0, flat.a2_hat.abs(), 1e-9));

    // projective line at level grid; oracle curvature from the same potential
    let levels: Vec<u32> = (1..=12).collect();
    let proj_fit = projective_series(&levels).expect("projective").fit.unwrap();
    let proj = model_space_data(RadialModel::Projective { mu: 1.0 }, 1, 1.0).expect("proj data");
    let lemma_a2 = tycz_coeffs_ke(proj.r2, 0.0, proj.lambda, 1).a2;
    checks.push(CheckReport::relative(
        "C11",
        "projective line: fitted linear coefficient = σ/2",
        proj.sigma / 2.0,
        proj_fit.a1_hat,
        1e-3,
    ));
    checks.push(CheckReport::absolute(
        "C11",
        "projective line: fitted a2 matches the curvature formula",
        lemma_a2,
        proj_fit.a2_hat,
        1e-3,
    ));

    // disc with μ = 2 (Einstein constant -1)
    let mu = 2.0;
    let disc_fit = disc_series(&alphas, mu).expect("disc").fit.unwrap();
    let disc = model_space_data(RadialModel::Hyperbolic { mu }, 1, mu).expect("disc data");
    let disc_a2 = tycz_coeffs_ke(disc.r2, 0.0, disc.lambda, 1).a2;
    checks.push(CheckReport::relative(
        "C11",
        "disc: fitted linear coefficient = σ/2",
        disc.sigma / 2.0,
        disc_fit.a1_hat,
        1e-3,
    ));
    checks.push(CheckReport::absolute(
        "C11",
        "disc: fitted a2 matches the curvature formula",
        disc_a2,
        disc_fit.a2_hat,
        1e-3,
    ));
    CriterionResult::new("C11", "distortion-function fits vs curvature", checks)
}

fn c12_section_norms(profile: &RadialProfile, quad: &QuadSettings) -> CriterionResult {
    let mut checks = Vec::new();
    for alpha in [2.0, 3.0] {
        match calabi_section_norm(alpha, profile, quad) {
            Ok(rep) => {
                checks.push(CheckReport::condition(
                    "C12",
                    &format!("section norm finite at α = {alpha} (value {:.6e})", rep.reduced_value),
                    rep.reduced_value,
                    rep.finite && rep.reduced_value > 0.0,
                ));
                checks.push(CheckReport::absolute(
                    "C12",
                    &format!("reduced vs direct quadrature gap at α = {alpha}"),
                    0.0,
                    rep.relative_gap,
                    1e-4,
                ));
            }
            Err(e) => {
                checks.push(
                    CheckReport::condition("C12", "section norm evaluated", f64::NAN, false)
                        .with_detail(e.to_string()),
                );
            }
        }
    }
    for c in [0.5, 1.0, 2.0, 5.0, 16.0] {
        let (computed, exact) = lorentzian_reduction_check(c);
        checks.push(CheckReport::relative(
            "C12",
            &format!("fiber identity 2π/√c at c = {c}"),
            exact,
            computed,
            1e-10,
        ));
    }
    CriterionResult::new("C12", "weighted section norms on the tube", checks)
}

fn c13_property_battery(cfg: &VerifyConfig, profile: &RadialProfile) -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();

    // series ring identities on seeded random data
    let mut worst_ring: f64 = 0.0;
    let mut worst_exp: f64 = 0.0;
    for _ in 0..24 {
        let ord = 8 + (rng.random::<u32>() % 9) as usize * 2;
        let coeffs: Vec<f64> = (0..=ord).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut b = coeffs.clone();
        b[0] = 1.0 + rng.random::<f64>(); // keep the divisor invertible
        let a = Series::from_coeffs(coeffs);
        let b = Series::from_coeffs(b);
        let back = series_div(&series_mul(&a, &b).unwrap(), &b).unwrap();
        for k in 0..=ord {
            worst_ring = worst_ring.max((back.coeffs[k] - a.coeffs[k]).abs());
        }
        let e = series_exp(&a);
        let em = series_exp(&a.neg());
        let prod = series_mul(&e, &em).unwrap();
        worst_exp = worst_exp.max((prod.coeffs[0] - 1.0).abs());
        for k in 1..=ord {
            worst_exp = worst_exp.max(prod.coeffs[k].abs());
        }
    }
    checks.push(CheckReport::absolute(
        "C13",
        "series ring identity (a·b)/b = a",
        0.0,
        worst_ring,
        1e-13,
    ));
    checks.push(CheckReport::absolute(
        "C13",
        "series identity exp(a)·exp(-a) = 1",
        0.0,
        worst_exp,
        1e-13,
    ));

    checks.push(CheckReport::absolute(
        "C13",
        "ODE residual on the grid",
        0.0,
        profile.residual(),
        1e-9,
    ));

    // determinism on the quick preset
    let q1 = solve_profile(&SolverConfig::quick()).expect("quick profile");
    let q2 = solve_profile(&SolverConfig::quick()).expect("quick profile");
    checks.push(CheckReport::condition(
        "C13",
        "identical configs give bitwise-identical profiles",
        q1.samples.len() as f64,
        q1.samples == q2.samples && q1.a_estimate == q2.a_estimate,
    ));

    // Riemann symmetries + rotation invariance at seeded points
    let family = PotentialFamily::TubeRadial { profile };
    let mut worst_sym: f64 = 0.0;
    let mut worst_rot: f64 = 0.0;
    for _ in 0..6 {
        let r = (0.15 + 0.7 * rng.random::<f64>()) * profile.a_estimate;
        let th = rng.random::<f64>() * std::f64::consts::TAU;
        let z = [
            C64::new(r * th.cos() / 2.0, rng.random::<f64>()),
            C64::new(r * th.sin() / 2.0, rng.random::<f64>()),
        ];
        let d = curvature_from_potential(&family, &z).expect("data");
        worst_sym = worst_sym.max(d.symmetry_violation());
        let z0 = [C64::new(r / 2.0, 0.0), C64::new(0.0, 0.0)];
        let d0 = curvature_from_potential(&family, &z0).expect("data");
        worst_rot = worst_rot.max((d.r2 - d0.r2).abs() / d0.r2);
    }
    checks.push(CheckReport::absolute(
        "C13",
        "Riemann symmetry relations",
        0.0,
        worst_sym,
        1e-10,
    ));
    checks.push(CheckReport::absolute(
        "C13",
        "rotation invariance of |R|²",
        0.0,
        worst_rot,
        1e-10,
    ));

    // decomposition recombination on moderate radii
    let ev = CurvatureEvaluator::new(profile).expect("evaluator");
    let mut worst_rec: f64 = 0.0;
    for &i in profile
        .interior_indices(0.3, 0.95)
        .iter()
        .step_by(40)
    {
        let s = &profile.samples[i];
        if s.y > profile.y0 + 18.0 {
            continue;
        }
        let d = curvature::boundary_limit_decomposition(profile, &[s.r]).expect("decomp");
        let routes = ev.dr2_routes(s.r).expect("routes");
        let lhs = 4.0 * (d[0].a + d[0].b + d[0].c);
        let rhs = s.yp * routes.printed;
        let scale = d[0].a.abs().max(d[0].b.abs()).max(d[0].c.abs()).max(1.0) * 4.0;
        worst_rec = worst_rec.max((lhs - rhs).abs() / scale);
    }
    checks.push(CheckReport::absolute(
        "C13",
        "A + B + C recombines to (1/4) y'∂_r|R|²",
        0.0,
        worst_rec,
        1e-9,
    ));

    CriterionResult::new("C13", "module property battery", checks)
}
