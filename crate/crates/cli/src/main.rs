//! `verify`: run verification suites and write a JSON report.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use reebsphere::verify::{emit_report, run_suite, VerifyError, SUITES};
use reebsphere::SuiteConfig;

#[derive(Debug, Parser)]
#[command(name = "verify", version, about = "Run numerical verification suites")]
struct Args {
    /// One of: quaternion, contact, transport, sphere-family, degree, roundtrip, all
    suite: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "grid-theta")]
    grid_theta: Option<usize>,
    #[arg(long = "grid-phi")]
    grid_phi: Option<usize>,
    #[arg(long = "rk4-step")]
    rk4_step: Option<f64>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Report destination; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// JSON config; command-line options take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Include per-check wall times in the report.
    #[arg(long)]
    timings: bool,
}

fn build_config(args: &Args) -> Result<SuiteConfig, VerifyError> {
    let mut config = match &args.config {
        Some(path) => SuiteConfig::from_file(path)?,
        None => SuiteConfig::default(),
    };
    config.suite = args.suite.clone();
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(m) = args.m {
        config.m = m;
    }
    if let Some(s) = args.samples {
        config.samples = s;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(g) = args.grid_theta {
        config.grid_theta = g;
    }
    if let Some(g) = args.grid_phi {
        config.grid_phi = g;
    }
    if let Some(h) = args.rk4_step {
        config.rk4_step = h;
    }
    for entry in &args.tol {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| VerifyError::Config(format!("--tol expects name=value, got {entry:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| VerifyError::Config(format!("tolerance {name} is not a number: {value:?}")))?;
        config.tolerances.insert(name.trim().to_string(), value);
    }
    config.validate()?;
    Ok(config)
}

fn run(args: &Args, config: &SuiteConfig) -> anyhow::Result<bool> {
    let report = run_suite(config)?;
    for check in &report.checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        let residual = check.max_residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
        match &check.error {
            Some(e) => eprintln!("{status} {} error: {e}", check.name),
            None => eprintln!("{status} {} residual {residual} tolerance {:.1e}", check.name, check.tolerance),
        }
    }
    match &args.report {
        Some(path) => emit_report(&report, path, args.timings).context("writing report")?,
        None => print!("{}", report.to_json(args.timings)),
    }
    eprintln!("overall: {}", if report.overall { "pass" } else { "fail" });
    Ok(report.overall)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if !SUITES.contains(&args.suite.as_str()) {
        eprintln!("error: unknown suite {:?}; expected one of {}", args.suite, SUITES.join(", "));
        return ExitCode::from(2);
    }
    // an unreadable config file counts as a configuration error
    let config = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&args, &config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config_error = e.downcast_ref::<VerifyError>().is_some_and(|v| matches!(v, VerifyError::Config(_)));
            ExitCode::from(if config_error { 2 } else { 1 })
        }
    }
}
