//! JSON report.

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    /// Absolute tolerance on `|got - expected|`.
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, expected: f64, got: f64, tol: f64) -> Self {
        let pass = got.is_finite() && (got - expected).abs() <= tol;
        Self {
            name: name.into(),
            expected,
            got,
            tol,
            pass,
        }
    }

    /// Relative comparison, reported with the equivalent absolute tolerance.
    pub fn relative(name: impl Into<String>, expected: f64, got: f64, rel: f64) -> Self {
        let scale = if expected == 0.0 { 1.0 } else { expected.abs() };
        Self::within(name, expected, got, rel * scale)
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::within(name, 1.0, if ok { 1.0 } else { 0.0 }, 0.0)
    }
}

/// Field order is part of the output contract; `runtime_ms` is the only field that
/// varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub task: String,
    pub inputs: Value,
    pub value: f64,
    pub error_estimate: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    pub runtime_ms: u64,
    pub seed: u64,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        if !self.value.is_finite() || !self.error_estimate.is_finite() {
            return Err(CliError::Internal(format!(
                "non-finite result: value {}, error {}",
                self.value, self.error_estimate
            )));
        }
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Internal(format!("serializing report: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}
