use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tolerances::ToleranceTable;
use super::VerifyError;

/// Suite names accepted by [`super::run_suite`].
pub const SUITES: [&str; 7] = ["quaternion", "contact", "transport", "sphere-family", "degree", "roundtrip", "all"];

/// Largest supported sphere parameter `n` (sphere `S^{4n+3}`).
pub const MAX_N: usize = 4;

/// Largest supported quaternionic dimension `m`.
pub const MAX_M: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct SuiteConfig {
    pub suite: String,
    /// Sphere parameter: the contact-form checks run on `S^{4n+3}`.
    pub n: usize,
    /// Largest quaternionic dimension; m-dependent checks run for `1..=m`.
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    /// Overrides of the default tolerance table.
    pub tolerances: BTreeMap<String, f64>,
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub rk4_step: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: "all".into(),
            n: 1,
            m: 3,
            samples: 100,
            seed: 0,
            tolerances: BTreeMap::new(),
            grid_theta: 24,
            grid_phi: 12,
            rk4_step: 1e-3,
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let config: Self = serde_json::from_str(text).map_err(|e| VerifyError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path).map_err(|source| VerifyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            VerifyError::Config(msg) => VerifyError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let fail = |msg: String| Err(VerifyError::Config(msg));
        if !SUITES.contains(&self.suite.as_str()) {
            return fail(format!("unknown suite {:?}; expected one of {}", self.suite, SUITES.join(", ")));
        }
        if self.n > MAX_N {
            return fail(format!("n must be at most {MAX_N}, got {}", self.n));
        }
        if self.m == 0 || self.m > MAX_M {
            return fail(format!("m must lie in 1..={MAX_M}, got {}", self.m));
        }
        if self.samples == 0 {
            return fail("samples must be positive".into());
        }
        if self.grid_theta == 0 || self.grid_phi == 0 {
            return fail("grid sizes must be positive".into());
        }
        if !(self.rk4_step > 0.0 && self.rk4_step <= 0.1) {
            return fail(format!("rk4Step must lie in (0, 0.1], got {}", self.rk4_step));
        }
        ToleranceTable::with_overrides(&self.tolerances)?;
        Ok(())
    }

    pub fn tolerance_table(&self) -> Result<ToleranceTable, VerifyError> {
        ToleranceTable::with_overrides(&self.tolerances)
    }
}
