//! Scenario configuration, the estimator bank, comparison reports and the
//! command implementations behind the `velatt` binary.

mod bank;
mod config;
mod report;
mod run;
mod stability;

pub use bank::{Estimator, InitContext};
pub use config::{
    EstimatorConfig, COMPARISON_DT, EstimatorKind, InitPolicy, NoNoise, NoiseConfig, OutputConfig, ScenarioConfig,
    StageConfig, TiltOutput, TwoStepConfig, SEED_ENV,
};
pub use report::{compare, ranking_table, ComparisonReport, Ranked, ReportRow};
pub use run::{
    build_bank, run_scenario, run_seeds, simulate, EstimatorTrace, RunOutput, Scenario, CONVERGENCE_HOLD,
    CONVERGENCE_THRESHOLD,
};
pub use stability::{first_stage_slope, log_slope, stability_check, worst_increase, Check, StabilityReport};

use std::path::{Path, PathBuf};

use crate::error::Result;

fn out_path(dir: &Path, configured: &Option<String>, default: &str) -> PathBuf {
    dir.join(configured.as_deref().unwrap_or(default))
}

/// Writes the ground-truth and measurement record of the scenario.
pub fn cmd_simulate(cfg: &ScenarioConfig, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let scenario = simulate(cfg, cfg.seed())?;
    let path = out_path(out_dir, &cfg.outputs.record, "simulation.csv");
    scenario.record().save(&path)?;
    Ok(path)
}

/// Runs the estimator bank, writes the full record, the report and a plotting
/// script, and returns the report.
pub fn cmd_run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<ComparisonReport> {
    std::fs::create_dir_all(out_dir)?;
    let scenario = simulate(cfg, cfg.seed())?;
    let out = run_scenario(cfg, &scenario, true)?;
    let record_path = out_path(out_dir, &cfg.outputs.record, "run.csv");
    out.record.as_ref().expect("recording requested").save(&record_path)?;
    let report = out.report(cfg.window)?;
    report.save(out_path(out_dir, &cfg.outputs.report, "report.csv"))?;
    let names: Vec<&str> = cfg.estimators.iter().map(|e| e.name.as_str()).collect();
    let file_name = record_path.file_name().and_then(|s| s.to_str()).unwrap_or("run.csv");
    std::fs::write(out_dir.join("plot.py"), plot_script(file_name, &names))?;
    Ok(report)
}

/// Merged ranking of saved reports.
pub fn cmd_compare<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<Ranked>> {
    let reports = paths.iter().map(ComparisonReport::load).collect::<Result<Vec<_>>>()?;
    compare(&reports)
}

fn plot_script(record: &str, names: &[&str]) -> String {
    let list = names.iter().map(|n| format!("{n:?}")).collect::<Vec<_>>().join(", ");
    format!(
        r#"# Plots tilt and heading-proxy errors from {record}.
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{record}"
names = [{list}]
with open(path) as f:
    rows = list(csv.DictReader(f))
t = [float(r["t"]) for r in rows]
fig, (ax_tilt, ax_yaw) = plt.subplots(2, 1, sharex=True)
for n in names:
    ax_tilt.plot(t, [float(r[n + ".tilt_angle"]) for r in rows], label=n)
    if n + ".yaw_angle" in rows[0]:
        ax_yaw.plot(t, [float(r[n + ".yaw_angle"]) for r in rows], label=n)
ax_tilt.set_ylabel("tilt error (rad)")
ax_yaw.set_ylabel("heading proxy error (rad)")
ax_yaw.set_xlabel("t (s)")
ax_tilt.legend()
plt.show()
"#
    )
}
