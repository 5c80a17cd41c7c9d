//! Numerical workbench for a family of Kähler–Einstein computations:
//!
//! * [`series`] — truncated power-series arithmetic and the Taylor recurrence
//!   generated by the tube ODE `(y'/r)^{n-1} y'' = e^y` at the origin,
//!   including the two origin limits obtained by series cancellation.
//! * [`ode`] — the singular initial-value problem solved out to its blow-up
//!   boundary, with a validated radial profile and a closed-form derivative
//!   cascade for `y''`, `y'''`, `y''''`.
//! * [`curvature`] — closed-form curvature invariants of the n = 2 tube
//!   metric: `|R|²`, its radial derivatives, the radial Laplacian, the
//!   boundary decomposition and every limit needed to show `a₃ ≢ 0`.
//! * [`tensor`] — an independent pointwise curvature engine that builds the
//!   metric, Riemann and Ricci tensors from a Kähler potential by direct
//!   contraction, plus the Lu scalar invariants and the TYCZ coefficients
//!   `a₁`, `a₂`, `a₃` for Kähler–Einstein metrics.
//! * [`epsilon`] — exact distortion (ε-) functions on model spaces through
//!   orthonormal section bases, asymptotic fits of the TYCZ coefficients,
//!   and the weighted section-norm integral on the tube domain.
//! * [`verify`] — the cross-checked acceptance suite used by the test
//!   harness and by the `tycz-lab verify-all` subcommand.
//!
//! # Sign conventions
//!
//! Curvature is normalized so that `Ric_{ij̄} = -∂_i ∂_j̄ log det g`: the
//! tube metric and complex-hyperbolic space have Einstein constant λ < 0,
//! projective space has λ > 0. With this normalization the distortion
//! function expands as `ε_α ~ αⁿ + (σ/2) α^{n-1} + …`, and the coefficient
//! formulas in [`tensor::tycz_coeffs_ke`] are stated for the opposite sign
//! of σ (see the book chapter on conventions).
//!
//! The guide under `book/` walks through each module with runnable
//! examples; `README.md` lists the command-line entry points.

pub mod curvature;
pub mod dd;
pub mod epsilon;
pub mod extrapolate;
pub mod ode;
pub mod quad;
pub mod report;
pub mod series;
pub mod tensor;
pub mod verify;

pub(crate) mod numutil;

pub use report::CheckReport;
pub use series::TaylorPoly;
