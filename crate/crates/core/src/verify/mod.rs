//! Verification suites, their configuration and machine-readable reports.

mod config;
mod report;
mod suites;
mod tolerances;

use std::path::PathBuf;

pub use config::{SuiteConfig, MAX_M, MAX_N, SUITES};
pub use report::{emit_report, CheckResult, VerificationReport};
pub use suites::run_suite;
pub use tolerances::{ToleranceTable, DEFAULT_TOLERANCES};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[cfg(test)]
mod tests;
