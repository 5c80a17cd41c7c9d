//! Pointwise Kähler curvature engine: metric, Riemann and Ricci tensors
//! and the scalar invariants, built from a potential by direct
//! contraction. This is the general-purpose counterpart to the closed
//! forms in [`crate::curvature`], and the two are cross-checked against
//! each other.
//!
//! Curvature sign convention: `Ric_{ij̄} = -∂_i∂_j̄ log det g`, so the
//! tube metric and the hyperbolic models have negative Einstein constant
//! and the projective models positive. The component formula is
//! `R_{ij̄kl̄} = -∂²g_{ij̄}/∂z_k∂z̄_l + g^{pq̄} (∂g_{iq̄}/∂z_k)(∂g_{pj̄}/∂z̄_l)`.
//!
//! Scalar contractions are evaluated in a unitary frame (metric
//! Cholesky), where every inverse-metric factor collapses to a Kronecker
//! delta; this removes the index-pairing pitfalls from the hot loops.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::ode::{OdeError, RadialProfile};

#[derive(Debug, Error)]
pub enum TensorError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("point outside the potential's domain: {0}")]
    OutOfDomain(String),
    #[error("metric is numerically singular at the evaluation point")]
    SingularMetric,
    #[error("metric is not Kähler–Einstein: max |Ric - λg| = {deviation:e} (λ̂ = {lambda_hat})")]
    NotEinstein { deviation: f64, lambda_hat: f64 },
    #[error("model invariants differ between sample points by {spread:e}")]
    NotHomogeneous { spread: f64 },
}

/// Rotation-invariant model potentials φ(|z|²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RadialModel {
    /// φ(u) = scale·u; flat space.
    Flat { scale: f64 },
    /// φ(u) = -μ log(1 - u) on the unit ball; Einstein constant -(n+1)/μ.
    Hyperbolic { mu: f64 },
    /// φ(u) = μ log(1 + u); Einstein constant +(n+1)/μ.
    Projective { mu: f64 },
}

impl RadialModel {
    /// (φ, φ', φ'', φ''', φ'''') at u.
    pub fn derivs(&self, u: f64) -> Result<[f64; 5], TensorError> {
        match *self {
            RadialModel::Flat { scale } => Ok([scale * u, scale, 0.0, 0.0, 0.0]),
            RadialModel::Hyperbolic { mu } => {
                if u >= 1.0 {
                    return Err(TensorError::OutOfDomain(format!("|z|² = {u} >= 1")));
                }
                let w = 1.0 - u;
                Ok([
                    -mu * w.ln(),
                    mu / w,
                    mu / (w * w),
                    2.0 * mu / w.powi(3),
                    6.0 * mu / w.powi(4),
                ])
            }
            RadialModel::Projective { mu } => {
                let w = 1.0 + u;
                Ok([
                    mu * w.ln(),
                    mu / w,
                    -mu / (w * w),
                    2.0 * mu / w.powi(3),
                    -6.0 * mu / w.powi(4),
                ])
            }
        }
    }
}

/// A Kähler potential family the engine can differentiate in closed form.
pub enum PotentialFamily<'a> {
    /// f(x) = y(|x|) with x = z + z̄, from a validated profile.
    TubeRadial { profile: &'a RadialProfile },
    /// f = φ(|z|²) for one of the model potentials.
    RotationRadial { model: RadialModel, n: usize },
}

/// Pointwise curvature record.
#[derive(Clone, Debug)]
pub struct KahlerPointData {
    pub n: usize,
    /// g_{ij̄}, row-major i, j.
    pub g: Vec<C64>,
    /// Matrix inverse of g (row-major).
    pub ginv: Vec<C64>,
    /// R_{ij̄kl̄}, row-major i, j, k, l.
    pub riem: Vec<C64>,
    /// Ric_{ij̄}, row-major.
    pub ric: Vec<C64>,
    pub sigma: f64,
    pub r2: f64,
    pub ric2: f64,
}

/// The Lu scalar contractions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LuScalars {
    pub sigma3: f64,
    /// Ric(R, R)
    pub ric_rr: f64,
    /// R(Ric, Ric)
    pub r_ricric: f64,
    /// div div (R, Ric), via the Kähler–Einstein reduction.
    pub divdiv_r_ric: f64,
}

/// TYCZ coefficients of a Kähler–Einstein metric.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TyczCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

/// Model-space summary: Einstein constant, curvature norm and coefficients.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModelSpaceData {
    pub lambda: f64,
    pub sigma: f64,
    pub r2: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

// ---- small complex-matrix helpers (n <= 4) ----

fn mat_idx(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

fn invert(n: usize, a: &[C64]) -> Option<Vec<C64>> {
    let mut m = a.to_vec();
    let mut inv = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        inv[mat_idx(n, i, i)] = C64::new(1.0, 0.0);
    }
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[mat_idx(n, row, col)].norm() > m[mat_idx(n, piv, col)].norm() {
                piv = row;
            }
        }
        if m[mat_idx(n, piv, col)].norm() < 1e-250 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(mat_idx(n, col, k), mat_idx(n, piv, k));
                inv.swap(mat_idx(n, col, k), mat_idx(n, piv, k));
            }
        }
        let d = m[mat_idx(n, col, col)];
        for k in 0..n {
            m[mat_idx(n, col, k)] /= d;
            inv[mat_idx(n, col, k)] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[mat_idx(n, row, col)];
            if f.norm() == 0.0 {
                continue;
            }
            for k in 0..n {
                let mc = m[mat_idx(n, col, k)];
                let ic = inv[mat_idx(n, col, k)];
                m[mat_idx(n, row, k)] -= f * mc;
                inv[mat_idx(n, row, k)] -= f * ic;
            }
        }
    }
    Some(inv)
}

/// Cholesky factor L (lower) of a Hermitian positive-definite matrix.
fn cholesky(n: usize, a: &[C64]) -> Option<Vec<C64>> {
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[mat_idx(n, i, j)];
            for k in 0..j {
                s -= l[mat_idx(n, i, k)] * l[mat_idx(n, j, k)].conj();
            }
            if i == j {
                if s.re <= 0.0 {
                    return None;
                }
                l[mat_idx(n, i, i)] = C64::new(s.re.sqrt(), 0.0);
            } else {
                l[mat_idx(n, i, j)] = s / l[mat_idx(n, j, j)];
            }
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
fn invert_lower(n: usize, l: &[C64]) -> Vec<C64> {
    let mut inv = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        inv[mat_idx(n, i, i)] = C64::new(1.0, 0.0) / l[mat_idx(n, i, i)];
        for j in 0..i {
            let mut s = C64::new(0.0, 0.0);
            for k in j..i {
                s += l[mat_idx(n, i, k)] * inv[mat_idx(n, k, j)];
            }
            inv[mat_idx(n, i, j)] = -s / l[mat_idx(n, i, i)];
        }
    }
    inv
}

/// Frame matrix S with Σ_{ij} S[i][α]·conj(S[j][β])·g_{ij̄} = δ_{αβ}.
fn unitary_frame(n: usize, g: &[C64]) -> Option<Vec<C64>> {
    // Cholesky of the transposed Gram matrix, then S = (L^{-1})†
    let gt: Vec<C64> = (0..n * n)
        .map(|idx| g[mat_idx(n, idx % n, idx / n)])
        .collect();
    let l = cholesky(n, &gt)?;
    let linv = invert_lower(n, &l);
    let mut s = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            s[mat_idx(n, i, j)] = linv[mat_idx(n, j, i)].conj();
        }
    }
    Some(s)
}

/// Curvature data re-expressed in a unitary frame.
struct Frame {
    n: usize,
    ric_on: Vec<C64>,
    riem_on: Vec<C64>,
}

impl Frame {
    fn build(d: &KahlerPointData) -> Option<Frame> {
        let n = d.n;
        let s = unitary_frame(n, &d.g)?;
        let sc: Vec<C64> = s.iter().map(|z| z.conj()).collect();
        let mut ric_on = vec![C64::new(0.0, 0.0); n * n];
        for a in 0..n {
            for b in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += s[mat_idx(n, i, a)] * sc[mat_idx(n, j, b)] * d.ric[mat_idx(n, i, j)];
                    }
                }
                ric_on[mat_idx(n, a, b)] = acc;
            }
        }
        let idx4 = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        // contract one index at a time: O(n^5) per pass
        let mut t = d.riem.clone();
        for pos in 0..4 {
            let mut next = vec![C64::new(0.0, 0.0); n * n * n * n];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = t[idx4(i, j, k, l)];
                            if v.norm() == 0.0 {
                                continue;
                            }
                            for m in 0..n {
                                let (w, dst) = match pos {
                                    0 => (s[mat_idx(n, i, m)], idx4(m, j, k, l)),
                                    1 => (sc[mat_idx(n, j, m)], idx4(i, m, k, l)),
                                    2 => (s[mat_idx(n, k, m)], idx4(i, j, m, l)),
                                    _ => (sc[mat_idx(n, l, m)], idx4(i, j, k, m)),
                                };
                                next[dst] += w * v;
                            }
                        }
                    }
                }
            }
            t = next;
        }
        Some(Frame {
            n,
            ric_on,
            riem_on: t,
        })
    }

    fn r4(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.riem_on[((i * self.n + j) * self.n + k) * self.n + l]
    }

    fn sigma(&self) -> f64 {
        (0..self.n)
            .map(|i| self.ric_on[mat_idx(self.n, i, i)].re)
            .sum()
    }

    fn ric2(&self) -> f64 {
        self.ric_on.iter().map(|z| z.norm_sqr()).sum()
    }

    fn r2(&self) -> f64 {
        self.riem_on.iter().map(|z| z.norm_sqr()).sum()
    }

    fn sigma3(&self) -> f64 {
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc += self.ric_on[mat_idx(n, i, j)]
                        * self.ric_on[mat_idx(n, j, k)]
                        * self.ric_on[mat_idx(n, k, i)];
                }
            }
        }
        acc.re
    }

    /// Ric(R, R) = Σ Ric_{ij̄} R_{jγ̄δq̄} R_{γīqδ̄}
    fn ric_rr(&self) -> f64 {
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let ric = self.ric_on[mat_idx(n, i, j)];
                if ric.norm() == 0.0 {
                    continue;
                }
                for g in 0..n {
                    for d in 0..n {
                        for q in 0..n {
                            acc += ric * self.r4(j, g, d, q) * self.r4(g, i, q, d);
                        }
                    }
                }
            }
        }
        acc.re
    }

    /// R(Ric, Ric) = Σ R_{ij̄kl̄} Ric_{jī} Ric_{lk̄}
    fn r_ricric(&self) -> f64 {
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc += self.r4(i, j, k, l)
                            * self.ric_on[mat_idx(n, j, i)]
                            * self.ric_on[mat_idx(n, l, k)];
                    }
                }
            }
        }
        acc.re
    }
}

/// Metric, curvature and invariants of the potential family at a point.
pub fn curvature_from_potential(
    family: &PotentialFamily,
    point: &[C64],
) -> Result<KahlerPointData, TensorError> {
    let (n, g, dg, ddg) = match family {
        PotentialFamily::TubeRadial { profile } => tube_tensors(profile, point)?,
        PotentialFamily::RotationRadial { model, n } => rotation_tensors(*model, *n, point)?,
    };
    assemble(n, g, dg, ddg)
}

/// Real radial ladder u_m with u_1 = y'/r and u_{m+1} = u_m'/r; these are
/// the pointwise values of the series P, Q, S (and S'/r).
fn radial_ladder(r: f64, yp: f64, ypp: f64, yppp: f64, ypppp: f64) -> [f64; 4] {
    let u1 = yp / r;
    let du1 = (ypp - u1) / r;
    let u2 = du1 / r;
    let du2 = (yppp - du1) / (r * r) - 2.0 * u2 / r;
    let u3 = du2 / r;
    let du1p = (yppp - du1) / r - (ypp - u1) / (r * r);
    let u3p = (ypppp - du1p) / r.powi(3) - 2.0 * (yppp - du1) / r.powi(4)
        - 3.0 * du2 / (r * r)
        + 2.0 * u2 / r.powi(3);
    let u4 = u3p / r;
    [u1, u2, u3, u4]
}

type Tensors = (usize, Vec<C64>, Vec<C64>, Vec<C64>);

fn tube_tensors(profile: &RadialProfile, point: &[C64]) -> Result<Tensors, TensorError> {
    let n = profile.n as usize;
    if point.len() != n {
        return Err(TensorError::OutOfDomain(format!(
            "point has {} coordinates, potential lives on C^{n}",
            point.len()
        )));
    }
    let x: Vec<f64> = point.iter().map(|z| 2.0 * z.re).collect();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > 0.0) || r > profile.r_max() {
        return Err(TensorError::OutOfDomain(format!(
            "radius {r} outside (0, {})",
            profile.r_max()
        )));
    }
    let s = profile.eval(r)?;
    let [u1, u2, u3, u4] = radial_ladder(r, s.yp, s.ypp, s.yppp, s.ypppp);
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut g = vec![C64::new(0.0, 0.0); n * n];
    let mut dg = vec![C64::new(0.0, 0.0); n * n * n];
    let mut ddg = vec![C64::new(0.0, 0.0); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            g[mat_idx(n, i, j)] = C64::new(u1 * delta(i, j) + u2 * x[i] * x[j], 0.0);
            for k in 0..n {
                let f3 = u2 * (delta(i, j) * x[k] + delta(i, k) * x[j] + delta(j, k) * x[i])
                    + u3 * x[i] * x[j] * x[k];
                dg[(i * n + j) * n + k] = C64::new(f3, 0.0);
                for l in 0..n {
                    let f4 = u2
                        * (delta(i, j) * delta(k, l)
                            + delta(i, k) * delta(j, l)
                            + delta(i, l) * delta(j, k))
                        + u3 * (delta(i, j) * x[k] * x[l]
                            + delta(i, k) * x[j] * x[l]
                            + delta(i, l) * x[j] * x[k]
                            + delta(j, k) * x[i] * x[l]
                            + delta(j, l) * x[i] * x[k]
                            + delta(k, l) * x[i] * x[j])
                        + u4 * x[i] * x[j] * x[k] * x[l];
                    ddg[((i * n + j) * n + k) * n + l] = C64::new(f4, 0.0);
                }
            }
        }
    }
    Ok((n, g, dg, ddg))
}

fn rotation_tensors(model: RadialModel, n: usize, point: &[C64]) -> Result<Tensors, TensorError> {
    if point.len() != n {
        return Err(TensorError::OutOfDomain(format!(
            "point has {} coordinates, potential lives on C^{n}",
            point.len()
        )));
    }
    let u: f64 = point.iter().map(|z| z.norm_sqr()).sum();
    let [_, p1, p2, p3, p4] = model.derivs(u)?;
    let z = point;
    let zb: Vec<C64> = z.iter().map(|w| w.conj()).collect();
    let delta = |i: usize, j: usize| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let mut g = vec![C64::new(0.0, 0.0); n * n];
    let mut dg = vec![C64::new(0.0, 0.0); n * n * n];
    let mut ddg = vec![C64::new(0.0, 0.0); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            g[mat_idx(n, i, j)] = p1 * delta(i, j) + p2 * zb[i] * z[j];
            for k in 0..n {
                dg[(i * n + j) * n + k] =
                    p2 * (delta(i, j) * zb[k] + delta(j, k) * zb[i]) + p3 * zb[i] * zb[k] * z[j];
                for l in 0..n {
                    ddg[((i * n + j) * n + k) * n + l] = p2
                        * (delta(k, l) * delta(i, j) + delta(i, l) * delta(j, k))
                        + p3 * (z[l] * zb[k] * delta(i, j)
                            + z[l] * zb[i] * delta(j, k)
                            + delta(k, l) * zb[i] * z[j]
                            + delta(i, l) * zb[k] * z[j])
                        + p4 * z[l] * zb[k] * zb[i] * z[j];
                }
            }
        }
    }
    Ok((n, g, dg, ddg))
}

fn assemble(
    n: usize,
    g: Vec<C64>,
    dg: Vec<C64>,
    ddg: Vec<C64>,
) -> Result<KahlerPointData, TensorError> {
    let ginv = invert(n, &g).ok_or(TensorError::SingularMetric)?;
    // g^{pq̄} = ginv[q][p]
    let up = |p: usize, q: usize| ginv[mat_idx(n, q, p)];
    let idx4 = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    let mut riem = vec![C64::new(0.0, 0.0); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut t2 = C64::new(0.0, 0.0);
                    for p in 0..n {
                        for q in 0..n {
                            t2 += up(p, q)
                                * dg[(i * n + q) * n + k]
                                * dg[(j * n + p) * n + l].conj();
                        }
                    }
                    riem[idx4(i, j, k, l)] = t2 - ddg[idx4(i, j, k, l)];
                }
            }
        }
    }
    let mut ric = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    acc += up(k, l) * riem[idx4(i, j, k, l)];
                }
            }
            ric[mat_idx(n, i, j)] = acc;
        }
    }
    let mut data = KahlerPointData {
        n,
        g,
        ginv,
        riem,
        ric,
        sigma: 0.0,
        r2: 0.0,
        ric2: 0.0,
    };
    let frame = Frame::build(&data).ok_or(TensorError::SingularMetric)?;
    data.sigma = frame.sigma();
    data.r2 = frame.r2();
    data.ric2 = frame.ric2();
    Ok(data)
}

impl KahlerPointData {
    /// Max violation of the Riemann symmetries
    /// `R_{ij̄kl̄} = R_{kj̄il̄} = R_{il̄kj̄} = conj(R_{jīlk̄})`, relative to
    /// the largest tensor entry.
    pub fn symmetry_violation(&self) -> f64 {
        let n = self.n;
        let idx4 = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        let scale = self
            .riem
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.riem[idx4(i, j, k, l)];
                        worst = worst.max((v - self.riem[idx4(k, j, i, l)]).norm());
                        worst = worst.max((v - self.riem[idx4(i, l, k, j)]).norm());
                        worst = worst.max((v - self.riem[idx4(j, i, l, k)].conj()).norm());
                    }
                }
            }
        }
        worst / scale
    }

    /// Estimated Einstein constant σ/n and the entrywise deviation
    /// max |Ric - λ̂ g|.
    pub fn einstein_deviation(&self) -> (f64, f64) {
        let lambda = self.sigma / self.n as f64;
        let dev = self
            .ric
            .iter()
            .zip(self.g.iter())
            .map(|(r, g)| (r - g * lambda).norm())
            .fold(0.0, f64::max);
        (lambda, dev)
    }

    /// Tensors flattened for the JSON dump; complex entries as [re, im],
    /// Riemann indices row-major (i, j̄, k, l̄).
    pub fn to_json(&self) -> serde_json::Value {
        let flat = |v: &[C64]| -> Vec<[f64; 2]> { v.iter().map(|z| [z.re, z.im]).collect() };
        serde_json::json!({
            "n": self.n,
            "g": flat(&self.g),
            "ginv": flat(&self.ginv),
            "riem": flat(&self.riem),
            "ric": flat(&self.ric),
            "sigma": self.sigma,
            "r2": self.r2,
            "ric2": self.ric2,
        })
    }
}

/// The Lu contractions σ₃(Ric), Ric(R,R), R(Ric,Ric) and the
/// divergence-pair value via the Kähler–Einstein identity
/// `div div (R, Ric) = -R(Ric,Ric) + σ₃(Ric)`; the covariant-derivative
/// terms that identity drops vanish for Einstein metrics, which is the
/// only regime in which `divdiv_r_ric` is quoted.
pub fn lu_scalars(d: &KahlerPointData) -> Result<LuScalars, TensorError> {
    let frame = Frame::build(d).ok_or(TensorError::SingularMetric)?;
    let sigma3 = frame.sigma3();
    let ric_rr = frame.ric_rr();
    let r_ricric = frame.r_ricric();
    Ok(LuScalars {
        sigma3,
        ric_rr,
        r_ricric,
        divdiv_r_ric: -r_ricric + sigma3,
    })
}

/// TYCZ coefficients of a Kähler–Einstein metric with Einstein constant
/// λ: a₁ = -nλ/2, a₂ = (|R|² + nλ²(3n-4))/24,
/// a₃ = (Δ|R|² - λ(n-2)(λ²n(n-2) + |R|²))/48.
pub fn tycz_coeffs_ke(r2: f64, lapr2: f64, lambda: f64, n: u32) -> TyczCoeffs {
    let nf = n as f64;
    TyczCoeffs {
        a1: -nf * lambda / 2.0,
        a2: (r2 + nf * lambda * lambda * (3.0 * nf - 4.0)) / 24.0,
        a3: (lapr2 - lambda * (nf - 2.0) * (lambda * lambda * nf * (nf - 2.0) + r2)) / 48.0,
    }
}

/// a₃ assembled through the unreduced route — divergence pair, Laplacian
/// term and the three cubic contractions — without the simplified
/// formula. The input must be Kähler–Einstein (checked entrywise).
pub fn tycz_a3_pipeline_ke(d: &KahlerPointData, lapr2: f64) -> Result<f64, TensorError> {
    let (lambda, dev) = d.einstein_deviation();
    let scale = d.g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-6 * scale.max(1.0) {
        return Err(TensorError::NotEinstein {
            deviation: dev,
            lambda_hat: lambda,
        });
    }
    let lu = lu_scalars(d)?;
    let nf = d.n as f64;
    let a3 = lu.divdiv_r_ric / 24.0 + lapr2 / 48.0
        - lambda * nf * (lambda * lambda * nf * nf + d.r2 - 4.0 * lambda * lambda * nf) / 48.0
        - (lu.sigma3 - lu.ric_rr + lu.r_ricric) / 24.0;
    Ok(a3)
}

/// Build the requested model space at the given scale, verify homogeneity
/// and the Einstein property at three sample points, and return the
/// invariants together with the coefficient formulas (Δ|R|² = 0 by
/// homogeneity).
pub fn model_space_data(
    model: RadialModel,
    n: usize,
    scale: f64,
) -> Result<ModelSpaceData, TensorError> {
    assert!(scale > 0.0, "scale must be positive");
    let model = match model {
        RadialModel::Flat { .. } => RadialModel::Flat { scale },
        RadialModel::Hyperbolic { .. } => RadialModel::Hyperbolic { mu: scale },
        RadialModel::Projective { .. } => RadialModel::Projective { mu: scale },
    };
    let family = PotentialFamily::RotationRadial { model, n };
    // three points with distinct radii and phases, inside the unit ball
    let mk = |seed: f64| -> Vec<C64> {
        (0..n)
            .map(|k| {
                let th = seed + 0.7 * k as f64;
                C64::new(th.cos(), th.sin()) * (0.15 + 0.08 * seed + 0.05 * k as f64)
                    / (n as f64).sqrt()
            })
            .collect()
    };
    let pts = [mk(0.3), mk(1.1), mk(2.2)];
    let mut results = Vec::new();
    for p in &pts {
        let d = curvature_from_potential(&family, p)?;
        let (lambda, dev) = d.einstein_deviation();
        let gscale = d.g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-8 * gscale.max(1.0) {
            return Err(TensorError::NotEinstein {
                deviation: dev,
                lambda_hat: lambda,
            });
        }
        results.push((d.sigma, d.r2, lambda));
    }
    let spread = results
        .iter()
        .map(|(s, r, _)| (s - results[0].0).abs().max((r - results[0].1).abs()))
        .fold(0.0_f64, f64::max)
        / results[0].1.abs().max(1.0);
    if spread > 1e-10 {
        return Err(TensorError::NotHomogeneous { spread });
    }
    let (sigma, r2, lambda) = results[0];
    let c = tycz_coeffs_ke(r2, 0.0, lambda, n as u32);
    Ok(ModelSpaceData {
        lambda,
        sigma,
        r2,
        a1: c.a1,
        a2: c.a2,
        a3: c.a3,
    })
}
