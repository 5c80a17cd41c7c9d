//! Endpoint limit estimation.
//!
//! Boundary limits are fitted as `q(s) = q∞ + α s^β` on a tail of samples
//! with `s = a - r` decreasing roughly geometrically; the exponent is
//! solved per sample triple and the spread of the resulting `q∞` values is
//! reported as the uncertainty. Origin limits use a least-squares fit in
//! even powers of r.

use crate::numutil::solve_dense;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtrapolateError {
    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },
    #[error("abscissae must be positive and strictly decreasing")]
    BadAbscissae,
    #[error("extrapolation did not converge: spread {spread:e} exceeds {budget:e}")]
    NotConverged { spread: f64, budget: f64 },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitFit {
    pub limit: f64,
    /// Fitted decay exponent (0 when the data were already converged).
    pub exponent: f64,
    /// Spread of the tail estimates; a data-driven error bar.
    pub uncertainty: f64,
}

/// Solve `(s1^b - s2^b)/(s2^b - s3^b) = ratio` for b by bisection.
fn solve_exponent(s1: f64, s2: f64, s3: f64, ratio: f64) -> Option<f64> {
    let g = |b: f64| {
        let p1 = s1.powf(b);
        let p2 = s2.powf(b);
        let p3 = s3.powf(b);
        (p1 - p2) / (p2 - p3) - ratio
    };
    let (mut lo, mut hi) = (0.02, 10.0);
    let (glo, ghi) = (g(lo), g(hi));
    if !glo.is_finite() || !ghi.is_finite() || glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Estimate `lim q(s)` as `s -> 0` from tail samples with decreasing `s`.
pub fn power_law_limit(s: &[f64], q: &[f64]) -> Result<LimitFit, ExtrapolateError> {
    if s.len() != q.len() || s.len() < 4 {
        return Err(ExtrapolateError::TooFewSamples {
            required: 4,
            actual: s.len().min(q.len()),
        });
    }
    for w in s.windows(2) {
        if !(w[1] > 0.0 && w[1] < w[0]) {
            return Err(ExtrapolateError::BadAbscissae);
        }
    }
    let scale = q.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let qn = *q.last().unwrap();

    // Already converged: successive values indistinguishable at 1e-13.
    let tail_move = q[q.len() - 4..]
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0_f64, f64::max);
    if tail_move < 1e-13 * scale {
        return Ok(LimitFit {
            limit: qn,
            exponent: 0.0,
            uncertainty: tail_move.max(1e-15 * scale),
        });
    }

    let mut estimates = Vec::new();
    for i in (1..s.len().saturating_sub(2)).rev().take(6) {
        let (s1, s2, s3) = (s[i - 1], s[i], s[i + 1]);
        let (q1, q2, q3) = (q[i - 1], q[i], q[i + 1]);
        let d1 = q1 - q2;
        let d2 = q2 - q3;
        if d2.abs() < 1e-15 * scale {
            continue;
        }
        if let Some(b) = solve_exponent(s1, s2, s3, d1 / d2) {
            let p2 = s2.powf(b);
            let p3 = s3.powf(b);
            let alpha = d2 / (p2 - p3);
            estimates.push((q3 - alpha * p3, b));
        }
    }
    if estimates.is_empty() {
        // fall back to the last sample with the observed movement as bar
        return Ok(LimitFit {
            limit: qn,
            exponent: 0.0,
            uncertainty: tail_move,
        });
    }
    let (limit, exponent) = estimates[0];
    let spread = estimates
        .iter()
        .map(|&(l, _)| (l - limit).abs())
        .fold(0.0_f64, f64::max)
        .max((limit - qn).abs() * 1e-3);
    Ok(LimitFit {
        limit,
        exponent,
        uncertainty: spread.max(1e-15 * scale),
    })
}

/// Estimate `lim q(r)` as `r -> 0` by least squares in even powers,
/// `q = c0 + c1 r² + … + c_deg r^{2 deg}`.
pub fn even_poly_limit(r: &[f64], q: &[f64], deg: usize) -> Result<LimitFit, ExtrapolateError> {
    let npar = deg + 1;
    if r.len() != q.len() || r.len() < npar + 1 {
        return Err(ExtrapolateError::TooFewSamples {
            required: npar + 1,
            actual: r.len().min(q.len()),
        });
    }
    // normal equations on the (1, r², r⁴, …) design
    let mut ata = vec![0.0; npar * npar];
    let mut atb = vec![0.0; npar];
    for (&ri, &qi) in r.iter().zip(q.iter()) {
        let u = ri * ri;
        let mut row = Vec::with_capacity(npar);
        let mut p = 1.0;
        for _ in 0..npar {
            row.push(p);
            p *= u;
        }
        for i in 0..npar {
            for j in 0..npar {
                ata[i * npar + j] += row[i] * row[j];
            }
            atb[i] += row[i] * qi;
        }
    }
    if !solve_dense(npar, &mut ata, &mut atb) {
        return Err(ExtrapolateError::BadAbscissae);
    }
    let mut rms = 0.0;
    for (&ri, &qi) in r.iter().zip(q.iter()) {
        let u = ri * ri;
        let mut fit = 0.0;
        let mut p = 1.0;
        for &c in &atb {
            fit += c * p;
            p *= u;
        }
        rms += (fit - qi) * (fit - qi);
    }
    rms = (rms / r.len() as f64).sqrt();
    Ok(LimitFit {
        limit: atb[0],
        exponent: 2.0,
        uncertainty: rms.max(1e-16 * atb[0].abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_power_law_tail() {
        // q = 3 + 2 s^{1.5}
        let s: Vec<f64> = (0..12).map(|k| 0.5_f64.powi(k) * 0.1).collect();
        let q: Vec<f64> = s.iter().map(|&x| 3.0 + 2.0 * x.powf(1.5)).collect();
        let fit = power_law_limit(&s, &q).unwrap();
        assert_relative_eq!(fit.limit, 3.0, max_relative = 1e-10);
        assert!((fit.exponent - 1.5).abs() < 1e-3);
    }

    #[test]
    fn handles_converged_data() {
        let s: Vec<f64> = (0..8).map(|k| 0.5_f64.powi(k)).collect();
        let q = vec![2.0; 8];
        let fit = power_law_limit(&s, &q).unwrap();
        assert_eq!(fit.limit, 2.0);
    }

    #[test]
    fn even_fit_recovers_origin_value() {
        let r: Vec<f64> = (1..20).map(|k| k as f64 * 0.005).collect();
        let q: Vec<f64> = r.iter().map(|&x| 1.5 - 0.125 * x * x + 0.01 * x.powi(4)).collect();
        let fit = even_poly_limit(&r, &q, 3).unwrap();
        assert_relative_eq!(fit.limit, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn rejects_increasing_abscissae() {
        let s = vec![0.1, 0.2, 0.3, 0.4];
        let q = vec![1.0; 4];
        assert!(matches!(
            power_law_limit(&s, &q),
            Err(ExtrapolateError::BadAbscissae)
        ));
    }
}
