//! One-dimensional quadrature: an adaptive 15-point Gauss–Kronrod rule,
//! a periodic trapezoid rule and composite Simpson panels.
//!
//! The Kronrod rule carries its embedded 7-point Gauss value, so each
//! panel produces an error estimate for free; the adaptive driver splits
//! the worst panel until the requested tolerance is met.

/// QUADPACK 15-point Kronrod abscissae on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Embedded 7-point Gauss weights (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of per-panel |Kronrod - Gauss| estimates.
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fl, fr) = if i == 7 {
            let v = f(c);
            (v, 0.0)
        } else {
            (f(c - h * x), f(c + h * x))
        };
        let s = fl + fr;
        kron += wk * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        } else if i == 7 {
            gauss += WG[3] * fl;
        }
    }
    (kron * h, (kron - gauss).abs() * h.abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b].
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
    max_panels: usize,
) -> QuadResult {
    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut panels = vec![Panel { a, b, value, error }];
    let mut evals = 15;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let tol = atol.max(rtol * total.abs());
        if err <= tol {
            return QuadResult {
                value: total,
                error: err,
                evals,
                converged: true,
            };
        }
        if panels.len() >= max_panels {
            return QuadResult {
                value: total,
                error: err,
                evals,
                converged: false,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        evals += 30;
        panels.push(Panel {
            a,
            b: m,
            value: v1,
            error: e1,
        });
        panels.push(Panel {
            a: m,
            b,
            value: v2,
            error: e2,
        });
    }
}

/// Trapezoid rule for a 2π-periodic integrand over one full period;
/// spectrally accurate for smooth integrands.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(mut f: F, n: usize) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<f64>() * h
}

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn composite_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = if panels % 2 == 0 { panels } else { panels + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let r = adaptive_gk(|x| x * x, 0.0, 1.0, 1e-12, 0.0, 100);
        assert_relative_eq!(r.value, 1.0 / 3.0, max_relative = 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn gk_handles_peaked_integrands() {
        // ∫_{-1}^{1} 1/(x² + 1e-4) dx = 2 atan(100)/0.01
        let exact = 2.0 * 100.0_f64.atan() / 0.01;
        let r = adaptive_gk(|x| 1.0 / (x * x + 1e-4), -1.0, 1.0, 1e-10, 0.0, 2000);
        assert!(r.converged);
        assert_relative_eq!(r.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn trapezoid_is_spectral_on_periodic_smooth() {
        // ∫_0^{2π} e^{cos θ} dθ = 2π I_0(1) = 7.95492652101284527...
        let v = periodic_trapezoid(|t| t.cos().exp(), 32);
        assert_relative_eq!(v, 7.954926521012845274, max_relative = 1e-13);
    }

    #[test]
    fn simpson_converges_fourth_order() {
        let coarse = composite_simpson(|x| x.sin(), 0.0, 1.0, 16);
        let fine = composite_simpson(|x| x.sin(), 0.0, 1.0, 32);
        let exact = 1.0 - 1.0_f64.cos();
        let e1 = (coarse - exact).abs();
        let e2 = (fine - exact).abs();
        assert!(e2 < e1 / 12.0, "e1 = {e1:e}, e2 = {e2:e}");
    }
}
