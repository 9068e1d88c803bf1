use std::collections::BTreeMap;

use super::VerifyError;

/// Default tolerance per check family.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("quaternion-relations", 1e-13),
    ("combine-square", 1e-13),
    ("exp-series", 1e-12),
    ("complexify", 1e-12),
    ("det-winding", 0.5),
    ("contact-volume", 1e-8),
    ("reeb-residual", 1e-10),
    ("reeb-closed-form", 1e-10),
    ("two-form-oracle", 1e-6),
    ("hamiltonian-residual", 1e-8),
    ("hamiltonian-linearity", 1e-9),
    ("flow-reeb-rotation", 1e-8),
    ("flow-order", 0.5),
    ("tangency-invariance", 1e-10),
    ("lift-residual", 1e-10),
    ("constant-path", 1e-12),
    ("lemma-parallel", 1e-5),
    ("lemma-parallel-order", 0.6),
    ("contactomorphism", 1e-6),
    ("concatenation", 1e-8),
    ("trivialization-fixed-point", 1e-6),
    ("lift-closed-form", 1e-8),
    ("pullback-analytic", 1e-9),
    ("pullback-spread", 1e-9),
    ("pullback-ode", 1e-6),
    ("conformal-factor", 1e-6),
    ("loop-at-infinity", 1e-6),
    ("loop-limit", 1e-6),
    ("loop-order", 0.2),
    ("reeb-identification", 1e-7),
    ("reeb-gram", 0.1),
    ("flow-group", 1e-12),
    ("winding", 0.5),
    ("conjugation", 1e-12),
    ("h-extend", 1e-13),
    ("eta-invariance", 1e-10),
    ("roundtrip", 1e-10),
];

/// Tolerances by family name, defaults overlaid with validated overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceTable(BTreeMap<String, f64>);

impl Default for ToleranceTable {
    fn default() -> Self {
        Self(DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    }
}

impl ToleranceTable {
    pub fn with_overrides(overrides: &BTreeMap<String, f64>) -> Result<Self, VerifyError> {
        let mut table = Self::default();
        for (name, &value) in overrides {
            let Some(slot) = table.0.get_mut(name) else {
                return Err(VerifyError::Config(format!("unknown tolerance {name:?}")));
            };
            if !(value > 0.0 && value.is_finite()) {
                return Err(VerifyError::Config(format!("tolerance {name} must be positive, got {value}")));
            }
            *slot = value;
        }
        Ok(table)
    }

    /// Panics on names missing from [`DEFAULT_TOLERANCES`].
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}
