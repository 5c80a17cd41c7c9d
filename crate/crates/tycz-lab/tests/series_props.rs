//! Property tests for the truncated-series ring and the tube recurrence.

use proptest::prelude::*;
use tycz_lab::series::{
    calabi_residual_series, calabi_series, limit_origin_expressions, series_div, series_exp,
    series_mul, Series, TaylorPoly,
};

fn series_strategy(max_order: usize) -> impl Strategy<Value = TaylorPoly> {
    (4..=max_order)
        .prop_flat_map(|ord| prop::collection::vec(-1.0f64..1.0, ord + 1))
        .prop_map(Series::from_coeffs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mul_then_div_roundtrips(a in series_strategy(20), shift in 1.0f64..3.0) {
        let mut b = a.clone();
        b.coeffs[0] = shift; // divisor with a safe constant term
        let prod = series_mul(&a, &b).unwrap();
        let back = series_div(&prod, &b).unwrap();
        for k in 0..=a.order {
            prop_assert!((back.coeffs[k] - a.coeffs[k]).abs() < 1e-13,
                "coeff {k}: {} vs {}", back.coeffs[k], a.coeffs[k]);
        }
    }

    #[test]
    fn exp_of_negative_is_reciprocal(a in series_strategy(16)) {
        let prod = series_mul(&series_exp(&a), &series_exp(&a.neg())).unwrap();
        prop_assert!((prod.coeffs[0] - 1.0).abs() < 1e-13);
        for k in 1..=a.order {
            prop_assert!(prod.coeffs[k].abs() < 1e-13, "coeff {k} = {:e}", prod.coeffs[k]);
        }
    }

    #[test]
    fn exp_satisfies_its_derivative_identity(a in series_strategy(16)) {
        // (exp a)' = a' · exp a through degree N-1
        let e = series_exp(&a);
        let lhs = e.derivative();
        let rhs = a.derivative().mul(&e.truncate(a.order - 1));
        let scale = e.max_abs().max(1.0);
        for k in 0..lhs.coeffs.len() {
            prop_assert!((lhs.coeffs[k] - rhs.coeffs[k]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn tube_series_solves_the_equation(y0 in -1.5f64..1.5, half_n in 1u32..3) {
        let n = half_n + 1; // dimension 2 or 3
        let y = calabi_series(y0, n, 20).unwrap();
        // odd coefficients vanish identically
        for k in (1..=y.order).step_by(2) {
            prop_assert_eq!(y.coeffs[k], 0.0);
        }
        // the residual series vanishes through its whole printed length
        let resid = calabi_residual_series(&y, n);
        let scale = series_exp(&y.truncate(resid.order)).max_abs();
        for (k, c) in resid.coeffs.iter().enumerate() {
            prop_assert!(c.abs() <= 1e-12 * scale, "residual coeff {k} = {c:e}");
        }
    }

    #[test]
    fn origin_limits_do_not_depend_on_y0(y0 in -1.2f64..1.2) {
        let y = calabi_series(y0, 2, 14).unwrap();
        let lims = limit_origin_expressions(&y).unwrap();
        prop_assert!((lims.l1 + 4.5).abs() < 1e-11, "l1 = {}", lims.l1);
        prop_assert!((lims.l2 - 0.1875).abs() < 1e-11, "l2 = {}", lims.l2);
    }
}
