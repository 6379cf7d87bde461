use velatt::batch::map_indexed_seq;
use velatt::harness::*;
use velatt::measurement::RunRecord;
use velatt::Error;

fn short(seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::comparison(seed);
    cfg.trajectory.duration = 3.0;
    cfg.window = [1.0, 3.0];
    cfg
}

#[test]
fn runs_are_reproducible_and_independent_of_the_pool() {
    let cfg = short(7);
    let seeds = [3u64, 4, 5, 6];
    let par: Vec<_> = run_seeds(&cfg, &seeds).into_iter().map(|o| o.unwrap().report(cfg.window).unwrap()).collect();
    let seq: Vec<_> = map_indexed_seq(seeds.len(), |i| {
        let sc = simulate(&cfg, seeds[i]).unwrap();
        run_scenario(&cfg, &sc, false).unwrap().report(cfg.window).unwrap()
    });
    assert_eq!(par, seq);
    assert_ne!(par[0], par[1], "different seeds should differ");
}

#[test]
fn adding_an_estimator_leaves_the_others_untouched() {
    let cfg = short(1);
    let sc = simulate(&cfg, 1).unwrap();
    let base = run_scenario(&cfg, &sc, true).unwrap();
    let mut more = cfg.clone();
    more.estimators.insert(
        1,
        EstimatorConfig { name: "extra".into(), kind: EstimatorKind::OneStep { alpha: 40.0, gamma: 30.0 } },
    );
    let bigger = run_scenario(&more, &sc, true).unwrap();
    let (a, b) = (base.record.unwrap(), bigger.record.unwrap());
    for col in &a.columns {
        assert_eq!(a.column(col), b.column(col), "{col}");
    }
}

#[test]
fn simulation_grid_and_noise_free_field() {
    let mut cfg = ScenarioConfig::comparison(0);
    cfg.trajectory.dt = 1e-3;
    cfg.noise = NoiseConfig::Off(NoNoise::None);
    let sc = simulate(&cfg, 0).unwrap();
    assert_eq!(sc.samples.len(), 10_001);
    assert!(sc.samples.iter().all(|y| (y.y_m.norm() - 1.0).abs() < 1e-12));
}

#[test]
fn simulate_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(42);
    let a = cmd_simulate(&cfg, &dir.path().join("a")).unwrap();
    let b = cmd_simulate(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rec = RunRecord::load(&a).unwrap();
    assert_eq!(rec.len(), 601);
}

#[test]
fn run_command_writes_record_report_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short(2);
    let report = cmd_run(&cfg, dir.path()).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert_eq!(report.rows.iter().filter(|r| r.mean_yaw_proxy.is_some()).count(), 4);
    let back = ComparisonReport::load(dir.path().join("report.csv")).unwrap();
    assert_eq!(back, report);
    let rec = RunRecord::load(dir.path().join("run.csv")).unwrap();
    assert!(rec.column("hierarchic.tilt_angle").is_some());
    assert!(std::fs::read_to_string(dir.path().join("plot.py")).unwrap().contains("run.csv"));
}

#[test]
fn truncated_record_names_the_last_complete_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = cmd_simulate(&short(0), dir.path()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let cut = text.lines().take(11).collect::<Vec<_>>().join("\n") + "\n1.0,2.0";
    match RunRecord::read_csv(cut.as_bytes()) {
        Err(Error::MalformedRecord { last_complete_row, .. }) => assert_eq!(last_complete_row, 10),
        other => panic!("{other:?}"),
    }
}

#[test]
fn compare_keeps_ties_in_first_appearance_order() {
    let row = |n: &str, t: f64| ReportRow {
        estimator: n.into(),
        mean_tilt_angle: t,
        mean_yaw_proxy: None,
        convergence_time: None,
        invalid_samples: 0,
    };
    let r = ComparisonReport { window: [2.0, 10.0], rows: vec![row("b", 0.1), row("a", 0.1), row("c", 0.01)] };
    let ranked = compare(&[r.clone(), r.clone()]).unwrap();
    let names: Vec<&str> = ranked.iter().map(|x| x.estimator.as_str()).collect();
    assert_eq!(names, ["c", "b", "a"]);
    assert_eq!(compare(std::slice::from_ref(&r)).unwrap().len(), 3);
    let mut other = r.clone();
    other.window = [1.0, 10.0];
    assert!(matches!(compare(&[r, other]), Err(Error::IncompatibleReports(_))));
}

#[test]
fn config_errors_are_reported_before_running() {
    let mut cfg = short(0);
    cfg.estimators.push(EstimatorConfig { name: "weak".into(), kind: EstimatorKind::OneStep { alpha: 5.0, gamma: 20.0 } });
    let sc = simulate(&cfg, 0).unwrap();
    let err = run_scenario(&cfg, &sc, false).unwrap_err().to_string();
    assert!(err.contains("weak"), "{err}");
    assert!(ScenarioConfig::from_json(r#"{"noise": "none", "estimators": [{"name": "x", "kind": "kalman"}], "init": "truth"}"#).is_err());
}

#[test]
fn stability_suite_passes_and_tolerates_rejected_gains() {
    let mut cfg = short(0);
    let report = stability_check(&cfg).unwrap();
    assert!(report.passed(), "{}", report.to_table());
    cfg.estimators.push(EstimatorConfig { name: "weak".into(), kind: EstimatorKind::OneStep { alpha: 5.0, gamma: 20.0 } });
    let report = stability_check(&cfg).unwrap();
    assert!(report.passed(), "{}", report.to_table());
    assert!(report.checks.iter().any(|c| c.name.starts_with("weak") && c.detail.contains("rejected")));
}

#[test]
fn shipped_config_is_the_reference_comparison() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/comparison.json");
    assert_eq!(ScenarioConfig::load(path).unwrap(), ScenarioConfig::comparison(0));
}
