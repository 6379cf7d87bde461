use crate::analysis::{convergence_time, mean_error_window, tilt_metrics, yaw_proxy_angle};
use crate::batch::map_indexed;
use crate::error::Result;
use crate::measurement::{add_noise, gen_trajectory, synth_measurements, ImuSample, RunRecord, TrueState};
use crate::ode::Hold;

use super::bank::{Estimator, InitContext};
use super::config::ScenarioConfig;
use super::report::{ComparisonReport, ReportRow};

/// Tilt angle below which an estimator counts as converged, and how long it
/// has to stay there.
pub const CONVERGENCE_THRESHOLD: f64 = 0.05;
pub const CONVERGENCE_HOLD: f64 = 0.5;

/// Ground truth and the (possibly noisy) measurement stream of one scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub truth: Vec<TrueState>,
    pub samples: Vec<ImuSample>,
}

impl Scenario {
    pub fn record(&self) -> RunRecord {
        let mut rec = RunRecord::new(Vec::new());
        for (s, y) in self.truth.iter().zip(&self.samples) {
            rec.push(*s, *y, Vec::new());
        }
        rec
    }
}

/// Generates the trajectory and measurements; the noise stream is seeded with `seed`.
pub fn simulate(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    let truth = gen_trajectory(&cfg.trajectory)?;
    let m = cfg.field()?;
    let mut noise = cfg.noise.spec();
    noise.seed = seed;
    let mut rng = noise.rng();
    let off = cfg.noise.is_off();
    let samples = truth
        .iter()
        .map(|s| {
            let y = synth_measurements(s, &m, cfg.g0);
            if off {
                y
            } else {
                add_noise(&y, &noise, &mut rng)
            }
        })
        .collect();
    Ok(Scenario { truth, samples })
}

/// Per-sample error traces of one estimator.
#[derive(Clone, Debug)]
pub struct EstimatorTrace {
    pub name: String,
    /// Angle between the true and estimated tilt (NaN when invalid).
    pub tilt_angle: Vec<f64>,
    /// Same for the normalized intermediate estimate, when the design has one.
    pub intermediate_angle: Option<Vec<f64>>,
    /// Heading-proxy error for attitude estimators (NaN when invalid).
    pub yaw_angle: Option<Vec<f64>>,
    /// Largest `|‖x̂₂‖ − 1|` seen (zero for unconstrained designs).
    pub max_sphere_drift: f64,
    /// Largest `‖R̂ᵀR̂ − I‖_F` seen.
    pub max_so3_drift: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub t: Vec<f64>,
    pub traces: Vec<EstimatorTrace>,
    pub record: Option<RunRecord>,
}

/// Builds every configured estimator, reporting all construction errors at once.
pub fn build_bank(cfg: &ScenarioConfig, scenario: &Scenario) -> Result<Vec<Estimator>> {
    let ctx = InitContext {
        truth: &scenario.truth[0],
        y0: &scenario.samples[0],
        m: cfg.field()?,
        g0: cfg.g0,
        policy: &cfg.init,
    };
    let (ok, errs): (Vec<_>, Vec<_>) = cfg.estimators.iter().map(|e| Estimator::build(e, &ctx)).partition(Result::is_ok);
    if !errs.is_empty() {
        let msgs: Vec<String> = errs
            .into_iter()
            .map(|e| match e.unwrap_err() {
                crate::Error::Config(msg) => msg,
                other => other.to_string(),
            })
            .collect();
        return Err(crate::Error::Config(msgs.join("; ")));
    }
    Ok(ok.into_iter().map(Result::unwrap).collect())
}

/// Runs the bank sample-synchronously over the shared measurement stream.
pub fn run_scenario(cfg: &ScenarioConfig, scenario: &Scenario, record: bool) -> Result<RunOutput> {
    let mut bank = build_bank(cfg, scenario)?;
    let m = cfg.field()?;
    let n = scenario.truth.len();
    let dt = cfg.trajectory.dt;
    let mut traces: Vec<EstimatorTrace> = bank
        .iter()
        .map(|e| EstimatorTrace {
            name: e.name.clone(),
            tilt_angle: Vec::with_capacity(n),
            intermediate_angle: e.intermediate().map(|_| Vec::with_capacity(n)),
            yaw_angle: e.has_attitude().then(|| Vec::with_capacity(n)),
            max_sphere_drift: 0.0,
            max_so3_drift: 0.0,
        })
        .collect();
    let mut rec = record.then(|| {
        RunRecord::new(bank.iter().flat_map(|e| e.fields().into_iter().map(|f| format!("{}.{f}", e.name))).collect())
    });
    let mut row = Vec::new();
    for k in 0..n {
        if k > 0 {
            let hold = Hold::Linear(&scenario.samples[k - 1], &scenario.samples[k]);
            for e in bank.iter_mut() {
                e.step(&hold, dt);
            }
        }
        let truth = &scenario.truth[k];
        row.clear();
        for (e, tr) in bank.iter().zip(traces.iter_mut()) {
            let tilt = e.tilt();
            let tm = tilt_metrics(truth, &tilt);
            tr.tilt_angle.push(tm.angle);
            if e.tilt_is_constrained() {
                tr.max_sphere_drift = tr.max_sphere_drift.max((tilt.norm() - 1.0).abs());
            }
            let prime = e.intermediate();
            if let (Some(p), Some(v)) = (prime, tr.intermediate_angle.as_mut()) {
                v.push(tilt_metrics(truth, &p).angle);
            }
            let att = e.attitude();
            let yaw = match att {
                Some(Some(r)) => {
                    tr.max_so3_drift = tr.max_so3_drift.max(r.orthonormality_error());
                    yaw_proxy_angle(&truth.r, &r, &m)?
                }
                _ => f64::NAN,
            };
            if let Some(v) = tr.yaw_angle.as_mut() {
                v.push(yaw);
            }
            if rec.is_some() {
                row.extend(e.velocity().iter());
                row.extend(tilt.iter());
                if let Some(p) = prime {
                    row.extend(p.iter());
                }
                if let Some(a) = att {
                    match a {
                        Some(r) => row.extend(r.to_row_major()),
                        None => row.extend([f64::NAN; 9]),
                    }
                    row.push(if a.is_some() { 1.0 } else { 0.0 });
                }
                row.push(tm.angle);
                if att.is_some() {
                    row.push(yaw);
                }
            }
        }
        if let Some(r) = rec.as_mut() {
            r.push(*truth, scenario.samples[k], row.clone());
        }
    }
    Ok(RunOutput { t: scenario.truth.iter().map(|s| s.t).collect(), traces, record: rec })
}

impl RunOutput {
    pub fn trace(&self, name: &str) -> Option<&EstimatorTrace> {
        self.traces.iter().find(|t| t.name == name)
    }

    /// Window means and convergence times of every estimator.
    pub fn report(&self, window: [f64; 2]) -> Result<ComparisonReport> {
        let [t0, t1] = window;
        let rows = self
            .traces
            .iter()
            .map(|tr| {
                let tilt = mean_error_window(&self.t, &tr.tilt_angle, t0, t1)?;
                let yaw = tr.yaw_angle.as_ref().map(|y| mean_error_window(&self.t, y, t0, t1)).transpose()?;
                let invalid = (0..self.t.len())
                    .filter(|&k| tr.tilt_angle[k].is_nan() || tr.yaw_angle.as_ref().is_some_and(|y| y[k].is_nan()))
                    .count();
                Ok(ReportRow {
                    estimator: tr.name.clone(),
                    mean_tilt_angle: tilt.mean,
                    mean_yaw_proxy: yaw.map(|w| w.mean),
                    convergence_time: convergence_time(&self.t, &tr.tilt_angle, CONVERGENCE_THRESHOLD, CONVERGENCE_HOLD),
                    invalid_samples: invalid,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ComparisonReport { window, rows })
    }

    /// Window mean of the intermediate-estimate error of `name`.
    pub fn intermediate_mean(&self, name: &str, window: [f64; 2]) -> Option<f64> {
        let v = self.trace(name)?.intermediate_angle.as_ref()?;
        mean_error_window(&self.t, v, window[0], window[1]).ok().map(|w| w.mean)
    }
}

/// Simulates and runs the scenario once per seed, in parallel when enabled.
pub fn run_seeds(cfg: &ScenarioConfig, seeds: &[u64]) -> Vec<Result<RunOutput>> {
    map_indexed(seeds.len(), |i| {
        let scenario = simulate(cfg, seeds[i])?;
        run_scenario(cfg, &scenario, false)
    })
}
