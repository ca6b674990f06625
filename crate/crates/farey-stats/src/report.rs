//! Named verification checks with machine-readable outcomes.

use serde::Serialize;
use std::fmt;
use std::time::Instant;

/// Outcome of one named check: computed value(s) against reference value(s),
/// a deviation under the check's norm, and the tolerance that decides `pass`.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub computed: Vec<f64>,
    pub reference: Vec<f64>,
    /// Deviation under the check's stated norm (usually sup over entries).
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: f64,
    pub detail: String,
}

impl VerificationReport {
    pub fn new(
        check: impl Into<String>,
        computed: Vec<f64>,
        reference: Vec<f64>,
        deviation: f64,
        tolerance: f64,
    ) -> Self {
        VerificationReport {
            check: check.into(),
            computed,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
            runtime_ms: 0.0,
            detail: String::new(),
        }
    }

    /// Single computed-vs-reference value compared by absolute difference.
    pub fn scalar(
        check: impl Into<String>,
        computed: f64,
        reference: f64,
        tolerance: f64,
    ) -> Self {
        let deviation = (computed - reference).abs();
        Self::new(check, vec![computed], vec![reference], deviation, tolerance)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn with_runtime(mut self, start: Instant) -> Self {
        self.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} deviation={:.3e} tol={:.3e} ({:.0} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.deviation,
            self.tolerance,
            self.runtime_ms,
        )?;
        if !self.detail.is_empty() {
            write!(f, "  [{}]", self.detail)?;
        }
        Ok(())
    }
}

/// True when every report in the slice passed.
pub fn all_pass(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
