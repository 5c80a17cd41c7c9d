//! Double-double arithmetic: an unevaluated sum of two `f64`s giving
//! roughly 32 significant digits.
//!
//! This backs the optional extended-precision mode of the series module.
//! The origin limits cancel several leading digits of `P⁶`-scale terms;
//! plain `f64` resolves them to ~1e-13, the extended mode to ~1e-28.
//! Only the operations the series code needs are implemented.

use serde::Serialize;

/// Value represented as `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum of two doubles (Knuth two-sum).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

/// Two-sum under the assumption `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// ln 2 to double-double accuracy.
    const LN2: Dd = Dd {
        hi: 0.693_147_180_559_945_3,
        lo: 2.319_046_813_846_299_6e-17,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// exp(x) by argument reduction x = k·ln2 + t, |t| <= ln2/2, and a
    /// Taylor sum for exp(t); the 2^k factor is exact.
    pub fn exp(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let t = self - Dd::LN2 * Dd::from_f64(k);
        // Taylor sum; |t| <= 0.35 so ~30 terms reach 1e-33.
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for i in 1..=34 {
            term = term * t / Dd::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        let scale = f64::powi(2.0, k as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }

    /// Reciprocal by one Newton step on a double seed.
    fn recip(self) -> Dd {
        let approx = 1.0 / self.hi;
        let x = Dd::from_f64(approx);
        // x' = x (2 - d x)
        let e = Dd::from_f64(2.0) - self * x;
        x * e
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let e = e + self.lo + rhs.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        // one refinement of q0 = self * recip(rhs)
        let q = self * rhs.recip();
        let r = self - rhs * q;
        q + r * rhs.recip()
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_tracks_lost_bits() {
        let a = Dd::from_f64(1.0);
        let b = Dd::from_f64(1e-20);
        let s = a + b;
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1e-20);
    }

    #[test]
    fn mul_and_div_are_consistent() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let p = a * b;
        let q = p / b;
        let err = (q - a).to_f64().abs();
        assert!(err < 1e-30, "err = {err:e}");
    }

    #[test]
    fn exp_one_matches_reference() {
        // e = 2.718281828459045235360287471352662...
        let e = Dd::from_f64(1.0).exp();
        assert!((e.hi - 2.718281828459045).abs() < 1e-15);
        let resid = e - Dd {
            hi: 2.718281828459045,
            lo: 1.4456468917292502e-16,
        };
        assert!(resid.to_f64().abs() < 1e-29, "resid = {:e}", resid.to_f64());
    }

    #[test]
    fn exp_respects_sum_rule() {
        let x = Dd::from_f64(0.7);
        let y = Dd::from_f64(-1.3);
        let lhs = (x + y).exp();
        let rhs = x.exp() * y.exp();
        let err = (lhs - rhs).to_f64().abs() / rhs.to_f64().abs();
        assert!(err < 1e-29, "err = {err:e}");
    }
}
