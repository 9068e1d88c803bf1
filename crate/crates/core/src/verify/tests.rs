use super::*;

fn small(suite: &str) -> SuiteConfig {
    SuiteConfig {
        suite: suite.into(),
        n: 0,
        m: 2,
        samples: 10,
        grid_theta: 4,
        grid_phi: 3,
        rk4_step: 1e-2,
        ..Default::default()
    }
}

#[test]
fn quaternion_suite_passes_with_tiny_residuals() {
    let report = run_suite(&small("quaternion")).unwrap();
    assert!(report.overall);
    for check in &report.checks {
        if check.name.starts_with("quaternion-relations") || check.name.starts_with("combine-square") {
            assert!(check.max_residual.unwrap() < 1e-12);
        }
    }
    let winding = report.checks.iter().find(|c| c.name == "det-winding[m=2]").unwrap();
    assert_eq!(winding.observed, Some(4.0));
}

#[test]
fn degree_suite_reports_winding_two_for_m_one() {
    let mut config = small("degree");
    config.m = 1;
    let report = run_suite(&config).unwrap();
    assert!(report.overall, "{:#?}", report.failures().collect::<Vec<_>>());
    let winding = report.checks.iter().find(|c| c.name == "winding[m=1]").unwrap();
    assert_eq!(winding.observed, Some(2.0));
}

#[test]
fn roundtrip_suite_passes() {
    assert!(run_suite(&small("roundtrip")).unwrap().overall);
}

#[test]
fn reports_are_deterministic_and_sorted() {
    let config = small("quaternion");
    let a = run_suite(&config).unwrap().to_json(false);
    let b = run_suite(&config).unwrap().to_json(false);
    assert_eq!(a, b);
    let value: serde_json::Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(!a.contains("wallTime"));
    assert!(run_suite(&config).unwrap().to_json(true).contains("wallTime"));
}

#[test]
fn different_seed_keeps_pass_pattern() {
    let mut config = small("quaternion");
    let a = run_suite(&config).unwrap();
    config.seed = 99;
    let b = run_suite(&config).unwrap();
    let pattern = |r: &VerificationReport| r.checks.iter().map(|c| (c.name.clone(), c.pass)).collect::<Vec<_>>();
    assert_eq!(pattern(&a), pattern(&b));
    assert_ne!(a.to_json(false), b.to_json(false));
}

#[test]
fn emitted_report_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let report = run_suite(&small("roundtrip")).unwrap();
    emit_report(&report, &path, false).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["overall"], serde_json::Value::Bool(true));
    assert_eq!(value["artifactVersion"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn empty_report_is_overall_pass() {
    let report = VerificationReport::new(&SuiteConfig::default(), Vec::new());
    assert!(report.overall);
    let value: serde_json::Value = serde_json::from_str(&report.to_json(false)).unwrap();
    assert_eq!(value["checks"], serde_json::json!([]));
}

#[test]
fn emit_report_surfaces_io_errors_with_path() {
    let report = VerificationReport::new(&SuiteConfig::default(), Vec::new());
    let path = std::path::Path::new("/nonexistent-dir/report.json");
    let err = emit_report(&report, path, false).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/report.json"));
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        SuiteConfig {
            suite: "nope".into(),
            ..Default::default()
        },
        SuiteConfig {
            m: 0,
            ..Default::default()
        },
        SuiteConfig {
            samples: 0,
            ..Default::default()
        },
        SuiteConfig {
            rk4_step: 0.5,
            ..Default::default()
        },
        SuiteConfig {
            tolerances: [("no-such-check".to_string(), 1.0)].into(),
            ..Default::default()
        },
        SuiteConfig {
            tolerances: [("roundtrip".to_string(), -1.0)].into(),
            ..Default::default()
        },
    ];
    for config in bad {
        assert!(matches!(run_suite(&config), Err(VerifyError::Config(_))), "{config:?}");
    }
}

#[test]
fn tolerance_override_can_force_failure() {
    let mut config = small("roundtrip");
    config.tolerances.insert("roundtrip".into(), 1e-300);
    let report = run_suite(&config).unwrap();
    assert!(report.checks.iter().all(|c| c.tolerance == 1e-300));
}

#[test]
fn config_json_parses_with_defaults() {
    let config = SuiteConfig::from_json(r#"{"suite": "degree", "m": 2, "rk4Step": 0.01}"#).unwrap();
    assert_eq!(config.m, 2);
    assert_eq!(config.n, SuiteConfig::default().n);
    assert!(SuiteConfig::from_json(r#"{"unknown": 1}"#).is_err());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]

    #[test]
    fn reports_are_deterministic_for_any_seed(seed in proptest::prelude::any::<u64>()) {
        let config = SuiteConfig { seed, ..small("degree") };
        let a = run_suite(&config).unwrap().to_json(false);
        let b = run_suite(&config).unwrap().to_json(false);
        proptest::prop_assert_eq!(a, b);
    }
}
