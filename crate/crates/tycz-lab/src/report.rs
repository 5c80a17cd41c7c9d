//! Machine-readable result records shared by the verification suite and
//! the command-line tool.

use serde::Serialize;

/// Schema version stamped into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

/// One numeric check: a claim, the target value, what was computed, the
/// tolerance it must meet and whether it did.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub claim: String,
    pub target: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    /// Absolute comparison: |computed - target| <= tolerance.
    pub fn absolute(id: &str, claim: &str, target: f64, computed: f64, tolerance: f64) -> Self {
        CheckReport {
            id: id.into(),
            claim: claim.into(),
            target,
            computed,
            tolerance,
            pass: (computed - target).abs() <= tolerance,
            detail: None,
        }
    }

    /// Relative comparison against max(1, |target|).
    pub fn relative(id: &str, claim: &str, target: f64, computed: f64, tolerance: f64) -> Self {
        let denom = target.abs().max(f64::MIN_POSITIVE);
        CheckReport {
            id: id.into(),
            claim: claim.into(),
            target,
            computed,
            tolerance,
            pass: ((computed - target) / denom).abs() <= tolerance,
            detail: None,
        }
    }

    /// A condition that must hold; `computed` carries the witness value.
    pub fn condition(id: &str, claim: &str, computed: f64, pass: bool) -> Self {
        CheckReport {
            id: id.into(),
            claim: claim.into(),
            target: f64::NAN,
            computed,
            tolerance: f64::NAN,
            pass,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    /// One-line rendering used by the acceptance suite and the CLI.
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        if self.target.is_nan() {
            format!("[{status}] {}: {} (value {:.6e})", self.id, self.claim, self.computed)
        } else {
            format!(
                "[{status}] {}: {} (target {:.10}, computed {:.10}, tol {:.1e})",
                self.id, self.claim, self.target, self.computed, self.tolerance
            )
        }
    }
}
