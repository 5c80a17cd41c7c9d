//! Truncated power-series arithmetic and the Taylor recurrence generated by
//! the tube ODE `(y'/r)^(n-1) y'' = e^y` at the origin.
//!
//! Everything here works on series centered at 0 with a fixed truncation
//! order; arithmetic never silently extends the order. The two origin
//! limits of the curvature norm are evaluated by assembling the relevant
//! combinations in series form and reading the surviving constant term
//! after the leading coefficients cancel.
//!
//! Arithmetic is generic over [`Coeff`] so the same code runs in plain
//! `f64` or in double-double precision ([`crate::dd::Dd`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::Dd;

/// Scalar types the series engine can run on.
pub trait Coeff:
    Copy
    + PartialOrd
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    /// Relative threshold below which a coefficient that should cancel
    /// exactly is accepted as zero.
    const CANCEL_TOL: f64;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn abs(self) -> Self;
}

impl Coeff for f64 {
    const CANCEL_TOL: f64 = 1e-9;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Coeff for Dd {
    const CANCEL_TOL: f64 = 1e-24;
    fn zero() -> Self {
        Dd::ZERO
    }
    fn one() -> Self {
        Dd::ONE
    }
    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn exp(self) -> Self {
        Dd::exp(self)
    }
    fn abs(self) -> Self {
        Dd::abs(self)
    }
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("division by a series with zero constant term (|b0| = {magnitude:e})")]
    DivisionByZeroConstant { magnitude: f64 },
    #[error("truncation order must be even and at least {required}, got {actual}")]
    InvalidOrder { required: usize, actual: usize },
    #[error("series order {actual} too small, need at least {required}")]
    OrderTooSmall { required: usize, actual: usize },
    #[error("odd coefficient c[{index}] = {value:e} is nonzero; expected an even series")]
    OddCoefficientNonzero { index: usize, value: f64 },
    #[error(
        "cancellation failed to resolve: degree-{degree} coefficient {leftover:e} \
         against term scale {scale:e}; raise the truncation order"
    )]
    CancellationNotResolved {
        degree: usize,
        leftover: f64,
        scale: f64,
    },
}

/// Truncated power series `c0 + c1 r + … + cN r^N` centered at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct Series<T> {
    /// Expansion center; always 0 here.
    pub center: f64,
    /// Truncation degree N.
    pub order: usize,
    /// Exactly `order + 1` coefficients, constant term first.
    pub coeffs: Vec<T>,
}

/// The `f64` series used throughout the crate.
pub type TaylorPoly = Series<f64>;

impl<T: Coeff> Series<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Series {
            center: 0.0,
            order: coeffs.len() - 1,
            coeffs,
        }
    }

    pub fn constant(value: T, order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        coeffs[0] = value;
        Series::from_coeffs(coeffs)
    }

    pub fn zero(order: usize) -> Self {
        Series::from_coeffs(vec![T::zero(); order + 1])
    }

    /// Coefficient of `r^k`; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> T {
        if k <= self.order {
            self.coeffs[k]
        } else {
            T::zero()
        }
    }

    /// True when the stored length matches the declared order and the
    /// center is 0; deserialized values should be checked once.
    pub fn invariants_hold(&self) -> bool {
        self.coeffs.len() == self.order + 1 && self.center == 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs().to_f64())
            .fold(0.0, f64::max)
    }

    /// Horner evaluation at `r`.
    pub fn eval(&self, r: T) -> T {
        let mut acc = T::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * r + c;
        }
        acc
    }

    /// Value of the d-th derivative at `r`.
    pub fn eval_deriv(&self, r: T, d: usize) -> T {
        if d > self.order {
            return T::zero();
        }
        let mut acc = T::zero();
        for k in (d..=self.order).rev() {
            let mut c = self.coeffs[k];
            for i in 0..d {
                c = c * T::from_f64((k - i) as f64);
            }
            acc = acc * r + c;
        }
        acc
    }

    /// Derivative series, one order lower.
    pub fn derivative(&self) -> Self {
        if self.order == 0 {
            return Series::zero(0);
        }
        let coeffs = (1..=self.order)
            .map(|k| self.coeffs[k] * T::from_f64(k as f64))
            .collect();
        Series::from_coeffs(coeffs)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Series::from_coeffs(self.coeffs[..=order].to_vec())
    }

    pub fn neg(&self) -> Self {
        Series::from_coeffs(self.coeffs.iter().map(|&c| -c).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        Series::from_coeffs(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Sum at the shorter of the two orders.
    pub fn add(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let coeffs = (0..=order).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect();
        Series::from_coeffs(coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// Cauchy product truncated at the shorter order.
    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut coeffs = vec![T::zero(); order + 1];
        for i in 0..=order {
            let a = self.coeffs[i];
            for j in 0..=order - i {
                coeffs[i + j] = coeffs[i + j] + a * rhs.coeffs[j];
            }
        }
        Series::from_coeffs(coeffs)
    }

    /// exp of the series; the constant term is exponentiated in the scalar
    /// domain and the rest follows from `(exp a)' = a' exp a`.
    pub fn exp(&self) -> Self {
        let mut out = vec![T::zero(); self.order + 1];
        out[0] = self.coeffs[0].exp();
        for k in 1..=self.order {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + T::from_f64(j as f64) * self.coeffs[j] * out[k - j];
            }
            out[k] = acc / T::from_f64(k as f64);
        }
        Series::from_coeffs(out)
    }

    /// Division; requires a nonvanishing constant term in `rhs`.
    pub fn div(&self, rhs: &Self) -> Result<Self, SeriesError> {
        let order = self.order.min(rhs.order);
        let b0 = rhs.coeffs[0];
        if b0.abs().to_f64() <= 1e-300 {
            return Err(SeriesError::DivisionByZeroConstant {
                magnitude: b0.abs().to_f64(),
            });
        }
        let mut out = vec![T::zero(); order + 1];
        for k in 0..=order {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc = acc - rhs.coeffs[j] * out[k - j];
            }
            out[k] = acc / b0;
        }
        Ok(Series::from_coeffs(out))
    }

    /// Divide by `r^m`: drop the first `m` coefficients after checking they
    /// vanish relative to `scale` (the magnitude of the terms that were
    /// supposed to cancel).
    pub fn shift_down(&self, m: usize, scale: f64) -> Result<Self, SeriesError> {
        if self.order < m {
            return Err(SeriesError::OrderTooSmall {
                required: m,
                actual: self.order,
            });
        }
        let tol = T::CANCEL_TOL * scale.max(f64::MIN_POSITIVE);
        for k in 0..m {
            let c = self.coeffs[k].abs().to_f64();
            if c > tol {
                return Err(SeriesError::CancellationNotResolved {
                    degree: k,
                    leftover: c,
                    scale,
                });
            }
        }
        Ok(Series::from_coeffs(self.coeffs[m..].to_vec()))
    }

    fn pow(&self, e: usize) -> Self {
        let mut acc = Series::constant(T::one(), self.order);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Cauchy product at fixed truncation; both inputs must carry the same order.
pub fn series_mul(a: &TaylorPoly, b: &TaylorPoly) -> Result<TaylorPoly, SeriesError> {
    if a.order != b.order {
        return Err(SeriesError::OrderMismatch {
            left: a.order,
            right: b.order,
        });
    }
    Ok(a.mul(b))
}

/// Exponential of a truncated series.
pub fn series_exp(a: &TaylorPoly) -> TaylorPoly {
    a.exp()
}

/// Quotient of two truncated series of equal order.
pub fn series_div(a: &TaylorPoly, b: &TaylorPoly) -> Result<TaylorPoly, SeriesError> {
    if a.order != b.order {
        return Err(SeriesError::OrderMismatch {
            left: a.order,
            right: b.order,
        });
    }
    a.div(b)
}

/// Taylor coefficients of the tube ODE solution `y(r)` with `y(0) = y0`,
/// solved degree by degree.
///
/// The ODE is singular at r = 0; the seed `y''(0) = e^{y0/n}` resolves the
/// indeterminacy, and every odd coefficient is exactly zero. At each even
/// degree the matched coefficient equation is affine in the next unknown,
/// so it is solved from two evaluations of the equation's left-hand side.
pub fn calabi_series(y0: f64, n: u32, order: usize) -> Result<TaylorPoly, SeriesError> {
    calabi_series_t::<f64>(y0, n, order)
}

/// Generic-precision version of [`calabi_series`].
pub fn calabi_series_t<T: Coeff>(y0: f64, n: u32, order: usize) -> Result<Series<T>, SeriesError> {
    if order < 6 || order % 2 != 0 {
        return Err(SeriesError::InvalidOrder {
            required: 6,
            actual: order,
        });
    }
    assert!(n >= 1, "dimension must be positive");
    let y0t = T::from_f64(y0);
    let mut b = vec![T::zero(); order + 1];
    b[0] = y0t;
    b[2] = (y0t / T::from_f64(n as f64)).exp() / T::from_f64(2.0);

    // coefficient of r^deg in (y'/r)^(n-1) * y''
    let lhs_coeff = |b: &[T], deg: usize| -> T {
        let get = |k: usize| if k <= order { b[k] } else { T::zero() };
        let u: Vec<T> = (0..=deg)
            .map(|k| T::from_f64((k + 2) as f64) * get(k + 2))
            .collect();
        let ypp: Vec<T> = (0..=deg)
            .map(|k| T::from_f64(((k + 2) * (k + 1)) as f64) * get(k + 2))
            .collect();
        let mut w = vec![T::zero(); deg + 1];
        w[0] = T::one();
        for _ in 0..n - 1 {
            let mut next = vec![T::zero(); deg + 1];
            for i in 0..=deg {
                for j in 0..=deg - i {
                    next[i + j] = next[i + j] + w[i] * u[j];
                }
            }
            w = next;
        }
        let mut acc = T::zero();
        for i in 0..=deg {
            acc = acc + w[i] * ypp[deg - i];
        }
        acc
    };
    // coefficient of r^deg in e^y; depends only on b[1..deg], all known.
    let rhs_coeff = |b: &[T], deg: usize| -> T {
        let mut e = vec![T::zero(); deg + 1];
        e[0] = T::one();
        for k in 1..=deg {
            let mut acc = T::zero();
            for j in 1..=k {
                let zj = if j <= order && j > 0 { b[j] } else { T::zero() };
                acc = acc + T::from_f64(j as f64) * zj * e[k - j];
            }
            e[k] = acc / T::from_f64(k as f64);
        }
        y0t.exp() * e[deg]
    };

    for m in 2..=order / 2 {
        let deg = 2 * m - 2;
        let rhs = rhs_coeff(&b, deg);
        b[2 * m] = T::zero();
        let l0 = lhs_coeff(&b, deg);
        b[2 * m] = T::one();
        let l1 = lhs_coeff(&b, deg);
        let slope = l1 - l0;
        b[2 * m] = (rhs - l0) / slope;
    }
    Ok(Series::from_coeffs(b))
}

/// Residual series of the ODE: `(y'/r)^(n-1) y'' - e^y`, truncated at
/// `y.order - 2`. Vanishes through its whole length for a valid solution.
pub fn calabi_residual_series<T: Coeff>(y: &Series<T>, n: u32) -> Series<T> {
    let m = y.order - 2;
    let u: Vec<T> = (0..=m).map(|k| T::from_f64((k + 2) as f64) * y.coeff(k + 2)).collect();
    let ypp: Vec<T> = (0..=m)
        .map(|k| T::from_f64(((k + 2) * (k + 1)) as f64) * y.coeff(k + 2))
        .collect();
    let u = Series::from_coeffs(u);
    let ypp = Series::from_coeffs(ypp);
    let lhs = u.pow((n - 1) as usize).mul(&ypp);
    let ey = y.truncate(m).exp();
    lhs.sub(&ey)
}

/// The three even series `P = y'/r`, `Q = P'/r`, `S = Q'/r`.
#[derive(Clone, Debug)]
pub struct PqsTriple {
    pub p: TaylorPoly,
    pub q: TaylorPoly,
    pub s: TaylorPoly,
}

/// Build `P`, `Q`, `S` from a tube-ODE series. `y` must be even.
pub fn pqs_series(y: &TaylorPoly) -> Result<PqsTriple, SeriesError> {
    for k in (1..=y.order).step_by(2) {
        if y.coeffs[k] != 0.0 {
            return Err(SeriesError::OddCoefficientNonzero {
                index: k,
                value: y.coeffs[k],
            });
        }
    }
    if y.order < 8 {
        return Err(SeriesError::OrderTooSmall {
            required: 8,
            actual: y.order,
        });
    }
    let scale = y.max_abs();
    let p = y.derivative().shift_down(1, scale)?;
    let q = p.derivative().shift_down(1, p.max_abs())?;
    let s = q.derivative().shift_down(1, q.max_abs())?;
    Ok(PqsTriple { p, q, s })
}

/// The two origin limits of the curvature-norm decomposition, together
/// with the inner limits before the prefactor is applied.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OriginLimits {
    /// Limit of the first grouped expression; equals -9/2 for every y0.
    pub l1: f64,
    /// Limit of the second grouped expression; equals 3/16 for every y0.
    pub l2: f64,
    /// Inner limit of the first group, `-(9/2) e^{7 y0 / 2}`.
    pub inner1: f64,
    /// Inner limit of the second group, `(3/16) e^{5 y0}`.
    pub inner2: f64,
}

/// Evaluate the two origin limits by series cancellation.
///
/// The grouped combinations `-8e^{3y} + 4P²e^{2y} - 2P⁴e^y + 6P⁶` and
/// `e^{4y} - e^{3y}P² - e^yP⁶ + P⁸` vanish to order r² and r⁴
/// respectively; the limits are the surviving constant terms after the
/// shift, divided by `P³e^{2y}` (resp. `P⁶e^{2y}`).
pub fn limit_origin_expressions(y: &TaylorPoly) -> Result<OriginLimits, SeriesError> {
    limit_origin_expressions_t::<f64>(y)
}

/// Generic-precision version of [`limit_origin_expressions`].
pub fn limit_origin_expressions_t<T: Coeff>(y: &Series<T>) -> Result<OriginLimits, SeriesError> {
    if y.order < 8 {
        return Err(SeriesError::OrderTooSmall {
            required: 8,
            actual: y.order,
        });
    }
    let m = y.order - 2;
    let yt = y.truncate(m);
    for k in (1..=yt.order).step_by(2) {
        if yt.coeffs[k].abs().to_f64() != 0.0 {
            return Err(SeriesError::OddCoefficientNonzero {
                index: k,
                value: yt.coeffs[k].to_f64(),
            });
        }
    }
    let p = {
        let scale = y.max_abs();
        y.derivative().shift_down(1, scale)?.truncate(m)
    };
    let e = yt.exp();

    let p2 = p.mul(&p);
    let p3 = p2.mul(&p);
    let p4 = p2.mul(&p2);
    let p6 = p3.mul(&p3);
    let p8 = p4.mul(&p4);
    let e2 = e.mul(&e);
    let e3 = e2.mul(&e);
    let e4 = e2.mul(&e2);

    let c8 = T::from_f64(8.0);
    let c4 = T::from_f64(4.0);
    let c2 = T::from_f64(2.0);
    let c6 = T::from_f64(6.0);

    // -8 e^{3y} + 4 P² e^{2y} - 2 P⁴ e^y + 6 P⁶, vanishing to order r².
    let g1 = p2
        .mul(&e2)
        .scale(c4)
        .sub(&e3.scale(c8))
        .sub(&p4.mul(&e).scale(c2))
        .add(&p6.scale(c6));
    let scale1 = e3.scale(c8).max_abs().max(p6.scale(c6).max_abs());
    let s1 = g1.shift_down(2, scale1)?;

    // e^{4y} - e^{3y} P² - e^y P⁶ + P⁸, vanishing to order r⁴.
    let g2 = e4.sub(&e3.mul(&p2)).sub(&e.mul(&p6)).add(&p8);
    let scale2 = e4.max_abs().max(p8.max_abs());
    let s2 = g2.shift_down(4, scale2)?;

    let l1 = s1.div(&p3.mul(&e2))?.coeff(0).to_f64();
    let l2 = s2.div(&p6.mul(&e2))?.coeff(0).to_f64();
    Ok(OriginLimits {
        l1,
        l2,
        inner1: s1.coeff(0).to_f64(),
        inner2: s2.coeff(0).to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly(coeffs: &[f64]) -> TaylorPoly {
        Series::from_coeffs(coeffs.to_vec())
    }

    #[test]
    fn mul_difference_of_squares() {
        // (1 + r)(1 - r) = 1 - r² at N = 4
        let a = poly(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        let b = poly(&[1.0, -1.0, 0.0, 0.0, 0.0]);
        let c = series_mul(&a, &b).unwrap();
        assert_eq!(c.coeffs, vec![1.0, 0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn mul_identity() {
        let a = poly(&[3.0, -2.0, 0.5, 0.25]);
        let one = Series::constant(1.0, 3);
        assert_eq!(series_mul(&a, &one).unwrap(), a);
    }

    #[test]
    fn mul_order_mismatch_is_an_error() {
        let a = poly(&[1.0, 1.0]);
        let b = poly(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            series_mul(&a, &b),
            Err(SeriesError::OrderMismatch { .. })
        ));
    }

    #[test]
    fn squared_exponential_series_matches_exp_of_doubled_argument() {
        // (Σ r^k / k!)² vs exp-series of 2r at N = 8
        let n = 8;
        let mut fact = 1.0;
        let mut coeffs = vec![0.0; n + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *c = 1.0 / fact;
        }
        let e = poly(&coeffs);
        let sq = series_mul(&e, &e).unwrap();
        let mut two_r = Series::zero(n);
        two_r.coeffs[1] = 2.0;
        let e2 = series_exp(&two_r);
        for k in 0..=n {
            assert_relative_eq!(sq.coeffs[k], e2.coeffs[k], max_relative = 1e-15);
        }
    }

    #[test]
    fn exp_of_zero_is_one() {
        let z = Series::zero(5);
        let e = series_exp(&z);
        assert_eq!(e.coeffs, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn exp_of_r() {
        let mut r = Series::zero(5);
        r.coeffs[1] = 1.0;
        let e = series_exp(&r);
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0];
        for (k, &want) in expect.iter().enumerate() {
            assert_relative_eq!(e.coeffs[k], want, max_relative = 1e-15);
        }
    }

    #[test]
    fn exp_of_tube_series_degree_two_coefficient() {
        // e^y for y0 = 0 has r² coefficient b2 = 1/2
        let y = calabi_series(0.0, 2, 6).unwrap();
        let e = series_exp(&y);
        assert_relative_eq!(e.coeffs[2], 0.5, max_relative = 1e-14);
    }

    #[test]
    fn div_self_is_one() {
        let a = poly(&[2.0, -1.0, 0.25, 3.0]);
        let q = series_div(&a, &a).unwrap();
        assert_relative_eq!(q.coeffs[0], 1.0, max_relative = 1e-15);
        for k in 1..=3 {
            assert!(q.coeffs[k].abs() < 1e-15);
        }
    }

    #[test]
    fn div_geometric_series() {
        let one = Series::constant(1.0, 3);
        let b = poly(&[1.0, -1.0, 0.0, 0.0]);
        let q = series_div(&one, &b).unwrap();
        assert_eq!(q.coeffs, vec![1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn div_by_zero_constant_is_an_error() {
        let a = Series::constant(1.0, 3);
        let b = poly(&[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            series_div(&a, &b),
            Err(SeriesError::DivisionByZeroConstant { .. })
        ));
    }

    #[test]
    fn tube_coefficients_at_origin_value_zero() {
        let y = calabi_series(0.0, 2, 12).unwrap();
        assert_relative_eq!(y.coeffs[2], 0.5, max_relative = 1e-15);
        assert_relative_eq!(y.coeffs[4], 1.0 / 32.0, max_relative = 1e-15);
        assert_relative_eq!(y.coeffs[6], 7.0 / 2304.0, max_relative = 1e-14);
    }

    #[test]
    fn tube_leading_coefficient_scales_with_y0() {
        for y0 in [-1.0, -0.3, 0.4, 1.0] {
            let y = calabi_series(y0, 2, 8).unwrap();
            assert_relative_eq!(y.coeffs[2], (y0 / 2.0).exp() / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn odd_coefficients_are_exactly_zero() {
        for y0 in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let y = calabi_series(y0, 2, 20).unwrap();
            for k in (1..=y.order).step_by(2) {
                assert_eq!(y.coeffs[k], 0.0, "y0 = {y0}, k = {k}");
            }
        }
    }

    #[test]
    fn rejects_odd_or_tiny_truncation_order() {
        assert!(matches!(
            calabi_series(0.0, 2, 7),
            Err(SeriesError::InvalidOrder { .. })
        ));
        assert!(matches!(
            calabi_series(0.0, 2, 4),
            Err(SeriesError::InvalidOrder { .. })
        ));
    }

    /// Independent oracle: substitute a candidate polynomial into the ODE
    /// and drive all residual coefficients to zero at once with a damped
    /// Newton iteration (finite-difference Jacobian, full dense solve).
    /// The residual coefficients are produced by a local convolution/exp
    /// routine so the oracle shares no code with the recurrence it checks.
    fn residual_newton_oracle(y0: f64, n: u32, order: usize) -> Vec<f64> {
        use crate::numutil::solve_dense;
        let m = order / 2 - 1; // unknowns b4, b6, …, b_order
        let b2 = (y0 / n as f64).exp() / 2.0;
        // residual coefficients of (y'/r)^{n-1} y'' - e^y at degrees 2, 4, …, order-2
        let resid = |x: &[f64]| -> Vec<f64> {
            let deg = order - 2;
            let mut b = vec![0.0; order + 1];
            b[0] = y0;
            b[2] = b2;
            for (i, &v) in x.iter().enumerate() {
                b[2 * i + 4] = v;
            }
            let u: Vec<f64> = (0..=deg).map(|k| {
                if k + 2 <= order { (k + 2) as f64 * b[k + 2] } else { 0.0 }
            }).collect();
            let ypp: Vec<f64> = (0..=deg).map(|k| {
                if k + 2 <= order { ((k + 2) * (k + 1)) as f64 * b[k + 2] } else { 0.0 }
            }).collect();
            let mut w = vec![0.0; deg + 1];
            w[0] = 1.0;
            for _ in 0..n - 1 {
                let mut nx = vec![0.0; deg + 1];
                for i in 0..=deg {
                    for j in 0..=deg - i {
                        nx[i + j] += w[i] * u[j];
                    }
                }
                w = nx;
            }
            let mut e = vec![0.0; deg + 1];
            e[0] = y0.exp();
            for k in 1..=deg {
                let mut acc = 0.0;
                for j in 1..=k.min(order) {
                    acc += j as f64 * b[j] * e[k - j];
                }
                e[k] = acc / k as f64;
            }
            (1..=m)
                .map(|i| {
                    let d = 2 * i;
                    let lhs: f64 = (0..=d).map(|q| w[q] * ypp[d - q]).sum();
                    lhs - e[d]
                })
                .collect()
        };
        let mut x = vec![0.0; m];
        for _ in 0..60 {
            let f = resid(&x);
            let mut jac = vec![0.0; m * m];
            for j in 0..m {
                let h = 1e-7 * (1.0 + x[j].abs());
                let mut xp = x.clone();
                xp[j] += h;
                let fp = resid(&xp);
                for i in 0..m {
                    jac[i * m + j] = (fp[i] - f[i]) / h;
                }
            }
            let mut step = f.clone();
            assert!(solve_dense(m, &mut jac, &mut step));
            let mut worst: f64 = 0.0;
            for j in 0..m {
                x[j] -= step[j];
                worst = worst.max(step[j].abs());
            }
            if worst < 1e-16 {
                break;
            }
        }
        x
    }

    #[test]
    fn higher_coefficients_match_independent_solve() {
        let order = 12;
        let y = calabi_series(0.0, 2, order).unwrap();
        let oracle = residual_newton_oracle(0.0, 2, order);
        for (i, &want) in oracle.iter().enumerate() {
            let k = 2 * i + 4;
            assert_relative_eq!(y.coeffs[k], want, max_relative = 1e-12);
        }
    }

    #[test]
    fn residual_series_vanishes() {
        for y0 in [-1.0, 0.0, 1.0] {
            let y = calabi_series(y0, 2, 24).unwrap();
            let resid = calabi_residual_series(&y, 2);
            let scale = series_exp(&y.truncate(resid.order)).max_abs();
            for (k, c) in resid.coeffs.iter().enumerate() {
                assert!(
                    c.abs() <= 1e-12 * scale,
                    "y0 = {y0}: residual coeff {k} = {c:e}"
                );
            }
        }
    }

    #[test]
    fn pqs_constant_terms() {
        let y = calabi_series(0.0, 2, 12).unwrap();
        let t = pqs_series(&y).unwrap();
        assert_relative_eq!(t.p.coeffs[0], 1.0, max_relative = 1e-14); // e^{y0/2}
        assert_relative_eq!(t.p.coeffs[2], 1.0 / 8.0, max_relative = 1e-14); // c2
        assert_relative_eq!(t.p.coeffs[4], 7.0 / 384.0, max_relative = 1e-13); // c4
        assert_relative_eq!(t.q.coeffs[0], 2.0 * (1.0 / 8.0), max_relative = 1e-14);
        assert_relative_eq!(t.s.coeffs[0], 8.0 * (7.0 / 384.0), max_relative = 1e-13);
    }

    #[test]
    fn pqs_rejects_odd_series() {
        let mut y = calabi_series(0.0, 2, 12).unwrap();
        y.coeffs[3] = 1e-3;
        assert!(matches!(
            pqs_series(&y),
            Err(SeriesError::OddCoefficientNonzero { index: 3, .. })
        ));
    }

    #[test]
    fn origin_limits_are_universal() {
        for y0 in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let y = calabi_series(y0, 2, 12).unwrap();
            let lims = limit_origin_expressions(&y).unwrap();
            assert_relative_eq!(lims.l1, -4.5, max_relative = 1e-12);
            assert_relative_eq!(lims.l2, 3.0 / 16.0, max_relative = 1e-12);
            assert_relative_eq!(
                lims.inner1,
                -4.5 * (3.5 * y0).exp(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                lims.inner2,
                (3.0 / 16.0) * (5.0 * y0).exp(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn origin_limits_in_extended_precision() {
        use crate::dd::Dd;
        let y = calabi_series_t::<Dd>(0.25, 2, 16).unwrap();
        let lims = limit_origin_expressions_t(&y).unwrap();
        assert!((lims.l1 + 4.5).abs() < 1e-15);
        assert!((lims.l2 - 0.1875).abs() < 1e-16);
    }

    #[test]
    fn origin_limits_report_unresolved_cancellation() {
        let mut y = calabi_series(0.0, 2, 12).unwrap();
        y.coeffs[2] += 1e-3; // break the recurrence: the r² terms no longer cancel
        assert!(matches!(
            limit_origin_expressions(&y),
            Err(SeriesError::CancellationNotResolved { .. })
        ));
    }

    #[test]
    fn origin_limits_need_order_eight() {
        let y = calabi_series(0.0, 2, 6).unwrap();
        assert!(matches!(
            limit_origin_expressions(&y),
            Err(SeriesError::OrderTooSmall { .. })
        ));
    }

    #[test]
    fn json_shape_is_stable() {
        let s = poly(&[1.0, 0.0, -0.5]);
        let txt = serde_json::to_string(&s).unwrap();
        assert_eq!(txt, r#"{"center":0.0,"order":2,"coeffs":[1.0,0.0,-0.5]}"#);
        let back: TaylorPoly = serde_json::from_str(&txt).unwrap();
        assert!(back.invariants_hold());
        assert_eq!(back, s);
    }
}
