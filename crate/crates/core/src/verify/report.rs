use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{SuiteConfig, VerifyError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResult {
    pub name: String,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// A reported quantity such as a winding number or matched sign.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    /// Error text for checks that could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub overall: bool,
    pub artifact_version: String,
}

impl VerificationReport {
    pub fn new(config: &SuiteConfig, checks: Vec<CheckResult>) -> Self {
        Self {
            suite: config.suite.clone(),
            config: config.clone(),
            seed: config.seed,
            overall: checks.iter().all(|c| c.pass),
            checks,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Key-sorted pretty JSON. Wall times are dropped unless `timings`.
    pub fn to_json(&self, timings: bool) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if !timings {
            if let Some(Value::Array(checks)) = value.get_mut("checks") {
                for check in checks {
                    if let Value::Object(map) = check {
                        map.remove("wallTime");
                    }
                }
            }
        }
        let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn emit_report(report: &VerificationReport, path: &Path, timings: bool) -> Result<(), VerifyError> {
    std::fs::write(path, report.to_json(timings)).map_err(|source| VerifyError::Io {
        path: path.to_path_buf(),
        source,
    })
}
