//! Report serialization shared by the subcommands. Output is
//! deterministic: pretty JSON with sorted object keys and a trailing
//! newline, so a rerun of the same config is byte-identical.

use std::path::Path;

use num_rational::BigRational;
use serde::Serialize;

use crate::CliError;

/// Exact rational rendered as `numerator/denominator`.
pub fn rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|err| CliError::usage(format!("cannot write {}: {err}", path.display())))
}

/// One named check of a suite, with its exact or statistical evidence.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub details: serde_json::Value,
}

/// Per-suite report: the exit status is 1 exactly when `pass` is false.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub schema: String,
    pub suite: String,
    pub name: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl SuiteResult {
    pub fn new(suite: &str, name: &str, seed: u64, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        SuiteResult {
            schema: "problab/report/1".to_string(),
            suite: suite.to_string(),
            name: name.to_string(),
            seed,
            checks,
            pass,
        }
    }
}
