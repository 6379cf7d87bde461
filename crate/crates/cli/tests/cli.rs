use std::path::Path;
use std::process::{Command, Output};

use velatt::harness::{ComparisonReport, EstimatorConfig, EstimatorKind, ScenarioConfig};

fn velatt(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_velatt"));
    cmd.args(args).env_remove("VELATT_SEED");
    if let Some(s) = seed {
        cmd.env("VELATT_SEED", s);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, cfg: &ScenarioConfig) -> String {
    let path = dir.join("scenario.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn short() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::comparison(1);
    cfg.trajectory.duration = 3.0;
    cfg.window = [1.0, 3.0];
    cfg
}

#[test]
fn run_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &short());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let run = velatt(&["run", "--config", &cfg, "--out", out_a.to_str().unwrap()], None);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let run = velatt(&["run", "--config", &cfg, "--out", out_b.to_str().unwrap()], Some("99"));
    assert_eq!(run.status.code(), Some(0));
    let a = ComparisonReport::load(out_a.join("report.csv")).unwrap();
    let b = ComparisonReport::load(out_b.join("report.csv")).unwrap();
    assert_ne!(a, b, "the environment seed should change the noise");

    let cmp = velatt(&["compare", out_a.join("report.csv").to_str().unwrap(), out_b.join("report.csv").to_str().unwrap()], None);
    assert_eq!(cmp.status.code(), Some(0));
    let text = String::from_utf8(cmp.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1 "), "{text}");
}

#[test]
fn seed_flag_matches_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &short());
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    assert!(velatt(&["simulate", "--config", &cfg, "--out", x.to_str().unwrap(), "--seed", "5"], None).status.success());
    assert!(velatt(&["simulate", "--config", &cfg, "--out", y.to_str().unwrap()], Some("5")).status.success());
    let read = |d: &Path| std::fs::read(d.join("simulation.csv")).unwrap();
    assert_eq!(read(&x), read(&y));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"noise\": 3 }").unwrap();
    let out = velatt(&["run", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let missing = velatt(&["stability-check", "--config", "/nonexistent/velatt.json"], None);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(velatt(&["frobnicate"], None).status.code(), Some(1));
    let cfg = write_config(dir.path(), &short());
    assert_eq!(velatt(&["simulate", "--config", &cfg, "--out", "x"], Some("not-a-number")).status.code(), Some(1));
}

#[test]
fn stability_check_passes_on_the_comparison_gains() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short();
    cfg.estimators.push(EstimatorConfig { name: "weak".into(), kind: EstimatorKind::OneStep { alpha: 5.0, gamma: 20.0 } });
    let path = write_config(dir.path(), &cfg);
    let out = velatt(&["stability-check", "--config", &path], None);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("rejected gains"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn suite_failure_exits_with_two() {
    // α₁·dt = 1.5: RK4 stays stable but no longer resolves the decay rate.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short();
    cfg.estimators = vec![EstimatorConfig {
        name: "stiff".into(),
        kind: EstimatorKind::TwoStep(velatt::harness::TwoStepConfig { order: 1, gamma: 20.0, alphas: Some(vec![300.0]) }),
    }];
    let path = write_config(dir.path(), &cfg);
    let out = velatt(&["stability-check", "--config", &path], None);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(2), "{text}");
    assert!(text.contains("FAIL stiff: z_p1 decay rate"), "{text}");
}
