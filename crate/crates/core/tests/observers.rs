use std::f64::consts::PI;

use velatt::attitude::{AttitudeEstimator, AttitudeGains, AttitudeObserver, TiltStage};
use velatt::harness::{
    first_stage_slope, run_scenario, simulate, EstimatorConfig, EstimatorKind, InitPolicy, NoNoise, NoiseConfig,
    ScenarioConfig, TwoStepConfig,
};
use velatt::measurement::{gen_trajectory, synth_measurements, TrajectorySpec};
use velatt::ode::Hold;
use velatt::so3::{angle_between, UnitVec3, Vec3, E_Z};
use velatt::tilt::{HuaGains, HuaObserver, OneStepGains, OneStepObserver, TiltEstimator, TwoStepGains, TwoStepObserver};
use velatt::DEFAULT_G0 as G0;

fn noisy(seed: u64) -> velatt::harness::Scenario {
    simulate(&ScenarioConfig::comparison(seed), seed).unwrap()
}

fn clean() -> velatt::harness::Scenario {
    let mut cfg = ScenarioConfig::comparison(0);
    cfg.trajectory.dt = 1e-3;
    cfg.noise = NoiseConfig::Off(NoNoise::None);
    simulate(&cfg, 0).unwrap()
}

#[test]
fn hua_without_second_gain_is_the_one_step_observer() {
    let sc = noisy(4);
    let dt = ScenarioConfig::comparison(0).trajectory.dt;
    let (alpha, gamma) = (28.0143, 20.0);
    let x0 = UnitVec3::new_unchecked(Vec3::new(0.3, -0.5, 0.8).normalize());
    let mut one = OneStepObserver::new(OneStepGains::new(alpha, gamma, G0).unwrap(), G0, sc.samples[0].y_v, x0);
    let mut hua = HuaObserver::new(HuaGains::new(alpha, 0.0, gamma, G0).unwrap(), G0, sc.samples[0].y_v, x0);
    let mut worst = 0.0f64;
    for w in sc.samples.windows(2) {
        let hold = Hold::Linear(&w[0], &w[1]);
        one.step(&hold, dt);
        hua.step(&hold, dt);
        worst = worst.max((one.xhat1 - hua.xhat1).amax()).max((one.xhat2 - hua.xhat2).amax());
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn hierarchic_tilt_ignores_the_magnetometer() {
    let sc = clean();
    let dt = 1e-3;
    let m = UnitVec3::new_unchecked(Vec3::new(1.0, 0.0, 1.0).normalize());
    let gains = AttitudeGains::hierarchic(20.0, 20.0).unwrap();
    let stage = TwoStepGains::binomial(2, 20.0, G0).unwrap();
    let rhat0 = velatt::so3::exp_so3(&Vec3::new(0.4, -0.9, 2.0));
    let build = || {
        let ts = TwoStepObserver::new(stage.clone(), G0, sc.samples[0].y_v, Vec3::new(0.1, 0.2, 0.9), UnitVec3::e_z());
        AttitudeObserver::new(gains, m, TiltStage::TwoStep(ts), rhat0)
    };
    let (mut a, mut b) = (build(), build());
    let mut worst = 0.0f64;
    let mut yaw_gap = 0.0f64;
    for w in sc.samples.windows(2) {
        a.step(&Hold::Linear(&w[0], &w[1]), dt);
        // Same stream with a corrupted magnetometer.
        let (mut p, mut q) = (w[0], w[1]);
        p.y_m = Vec3::new(0.3, 0.9, -0.2);
        q.y_m = Vec3::new(-0.5, 0.1, 0.7);
        b.step(&Hold::Linear(&p, &q), dt);
        let (ra, rb) = (a.attitude().unwrap(), b.attitude().unwrap());
        worst = worst.max((ra.inverse_apply(&E_Z) - rb.inverse_apply(&E_Z)).amax());
        yaw_gap = yaw_gap.max(ra.angle_to(&rb));
    }
    assert!(worst <= 1e-12, "{worst:e}");
    assert!(yaw_gap > 0.1, "the heading should differ: {yaw_gap}");
}

#[test]
fn first_stage_rate_scales_with_alpha() {
    let sc = clean();
    let a = 28.0143;
    let s1 = first_stage_slope(&TwoStepGains::new(vec![a], 20.0).unwrap(), G0, &sc, 1e-3).unwrap();
    let s2 = first_stage_slope(&TwoStepGains::new(vec![2.0 * a], 20.0).unwrap(), G0, &sc, 1e-3).unwrap();
    assert!((s1 / -a - 1.0).abs() < 0.01, "{s1}");
    assert!((s2 / s1 - 2.0).abs() < 0.02, "{s1} {s2}");
}

fn two_step_bank(cfg: &mut ScenarioConfig) {
    cfg.noise = NoiseConfig::Off(NoNoise::None);
    cfg.estimators = (1..=3)
        .map(|n| EstimatorConfig {
            name: format!("n{n}"),
            kind: EstimatorKind::TwoStep(TwoStepConfig { order: n, gamma: 20.0, alphas: None }),
        })
        .collect();
}

#[test]
fn undesired_start_keeps_the_sphere_estimate_while_the_intermediate_converges() {
    // Level and at rest: every horizontal component is exactly zero, so the
    // antipodal estimate is an exact fixed point in floating point.
    let mut cfg = ScenarioConfig::comparison(0);
    cfg.trajectory = TrajectorySpec::stationary(10.0, 1e-3, velatt::so3::Rotation::identity());
    two_step_bank(&mut cfg);
    let out = run_scenario(&cfg, &simulate(&cfg, 0).unwrap(), false).unwrap();
    for tr in &out.traces {
        let prime = tr.intermediate_angle.as_ref().unwrap();
        assert!(*prime.last().unwrap() < 1e-9, "{}: {}", tr.name, prime.last().unwrap());
        assert!(tr.tilt_angle.iter().all(|a| *a == PI), "{}", tr.name);
    }
}

#[test]
fn undesired_start_on_a_moving_trajectory_is_left_only_slowly() {
    // The antipode repels at about γ‖x̂₂′‖, so integration residuals of a
    // moving trajectory eventually push the estimate off; it holds early on.
    let mut cfg = ScenarioConfig::comparison(0);
    cfg.trajectory.dt = 1e-3;
    two_step_bank(&mut cfg);
    let out = run_scenario(&cfg, &simulate(&cfg, 0).unwrap(), false).unwrap();
    for tr in &out.traces {
        let prime = tr.intermediate_angle.as_ref().unwrap();
        assert!(*prime.last().unwrap() < 1e-4, "{}: {}", tr.name, prime.last().unwrap());
        let closest = tr.tilt_angle[..250].iter().cloned().fold(PI, f64::min);
        assert!(closest > PI - 1e-3, "{}: {closest}", tr.name);
    }
}

#[test]
fn truth_start_without_noise_stays_put() {
    let mut cfg = ScenarioConfig::comparison(0);
    cfg.trajectory.dt = 1e-3;
    cfg.noise = NoiseConfig::Off(NoNoise::None);
    cfg.init = InitPolicy::Truth;
    let sc = simulate(&cfg, 0).unwrap();
    let report = run_scenario(&cfg, &sc, false).unwrap().report(cfg.window).unwrap();
    for row in &report.rows {
        assert!(row.mean_tilt_angle <= 1e-5, "{}: {}", row.estimator, row.mean_tilt_angle);
        if let Some(y) = row.mean_yaw_proxy {
            assert!(y <= 1e-5, "{}: {y}", row.estimator);
        }
    }
}

#[test]
fn stationary_one_step_converges_from_a_large_error() {
    let spec = TrajectorySpec::stationary(5.0, 1e-3, velatt::so3::Rotation::identity());
    let truth = gen_trajectory(&spec).unwrap();
    let m = UnitVec3::new_unchecked(Vec3::new(1.0, 0.0, 1.0).normalize());
    let ys: Vec<_> = truth.iter().map(|s| synth_measurements(s, &m, G0)).collect();
    let mut obs = OneStepObserver::new(
        OneStepGains::critically_damped(20.0, G0).unwrap(),
        G0,
        Vec3::zeros(),
        UnitVec3::new_unchecked(Vec3::new(1.0, 0.0, -0.2).normalize()),
    );
    for w in ys.windows(2) {
        obs.step(&Hold::Linear(&w[0], &w[1]), 1e-3);
    }
    assert!(angle_between(&obs.xhat2, &E_Z) < 1e-6);
}
