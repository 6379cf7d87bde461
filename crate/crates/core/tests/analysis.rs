use velatt::analysis::*;
use velatt::attitude::{
    consistency_check, AttitudeEstimator, AttitudeGains, AttitudeObserver, QuatErrorState, TiltStage,
};
use velatt::harness::{simulate, NoNoise, NoiseConfig, ScenarioConfig};
use velatt::ode::Hold;
use velatt::quat::Quat;
use velatt::so3::{exp_so3, Rotation, UnitVec3, Vec3, E_Z};
use velatt::tilt::{TwoStepGains, TwoStepObserver};
use velatt::DEFAULT_G0 as G0;

fn m() -> UnitVec3 {
    UnitVec3::new_unchecked(Vec3::new(1.0, 0.0, 1.0).normalize())
}

#[test]
fn wrho_is_positive_definite_with_known_spectrum() {
    let w = build_wrho(20.0, 20.0, &m()).unwrap();
    // Eigenvalues of −ρ₁S²(e_z) − ρ₂S²(m) at 45°: ρ(2 ± √2)… and ρ₁ + ρ₂.
    let s = 2.0f64.sqrt();
    let expect = [10.0 * (2.0 - s), 10.0 * (2.0 + s), 40.0];
    for (l, e) in w.eigenvalues.iter().zip(expect) {
        assert!((l - e).abs() < 1e-12, "{l} vs {e}");
    }
    assert!(w.residual() < 1e-12);
    assert!((w.eigenvectors.determinant() - 1.0).abs() < 1e-12);
    assert!(build_wrho(20.0, 0.0, &m()).is_err());
    assert!(build_wrho(1.0, 1.0, &UnitVec3::e_z()).is_err());
}

#[test]
fn attitude_equilibria_are_invariant() {
    let g = AttitudeGains::new(20.0, 20.0, 10.0).unwrap();
    let w = build_wrho(g.rho1, g.rho2, &m()).unwrap();
    let alpha1 = 28.0;
    let origin = QuatErrorState { z_p1: Vec3::zeros(), q: Quat::identity() };
    let starts = std::iter::once(origin)
        .chain((0..3).map(|j| QuatErrorState { z_p1: Vec3::zeros(), q: Quat::new(0.0, Vec3::ith(j, 1.0)) }));
    for x0 in starts {
        let flow = integrate_principal_attitude_flow(x0, &w, &g, alpha1, 1e-3, 10_000).unwrap();
        let dev = flow.iter().map(|x| x.z_p1.norm().max(x.q.angle_to(&x0.q))).fold(0.0, f64::max);
        assert!(dev <= 1e-6, "{x0:?}: {dev:e}");
    }
    // The rotation each undesired equilibrium stands for is a half-turn.
    let eq = w.from_principal(&QuatErrorState { z_p1: Vec3::zeros(), q: Quat::new(0.0, Vec3::x()) });
    assert!((error_rotation_angle(&eq) - std::f64::consts::PI).abs() < 1e-12);
}

fn error_rotation_angle(xi: &QuatErrorState) -> f64 {
    velatt::attitude::error_rotation(xi).angle_to(&Rotation::identity())
}

#[test]
fn tilt_equilibria_are_invariant() {
    for alphas in [vec![196.2], vec![196.2, 28.0143], vec![8.0, 12.0, 6.0]] {
        for z2 in [Vec3::zeros(), E_Z * 2.0] {
            let x0 = TiltFlowState { zp: vec![Vec3::zeros(); alphas.len()], z2 };
            let flow = integrate_tilt_flow(x0, &alphas, 20.0, 1e-3, 10_000).unwrap();
            assert!(flow.iter().all(|x| (x.z2 - z2).norm() <= 1e-6 && x.zp.iter().all(|z| z.norm() == 0.0)));
        }
    }
}

#[test]
fn linearization_matches_finite_differences_and_is_unstable() {
    for (rho1, rho2, mu) in [(20.0, 20.0, 0.0), (20.0, 5.0, 30.0), (3.0, 40.0, 1.0)] {
        let g = AttitudeGains::new(rho1, rho2, mu).unwrap();
        let w = build_wrho(rho1, rho2, &m()).unwrap();
        for j in 0..3 {
            let a = linearization_a(&w, j, &g, 28.0).unwrap();
            let fd = linearization_fd(&w, j, &g, 28.0, 1e-6).unwrap();
            assert!((a.matrix - fd).amax() <= 1e-5, "({rho1},{rho2},{mu}) j={j}: {:e}", (a.matrix - fd).amax());
            assert!(a.max_real_eigenvalue() > 0.0);
        }
    }
    let w = build_wrho(1.0, 1.0, &m()).unwrap();
    assert!(linearization_a(&w, 3, &AttitudeGains::invariant(1.0, 1.0).unwrap(), 1.0).is_err());
}

#[test]
fn undesired_init_is_a_half_turn_about_the_horizontal_axis() {
    let r = undesired_init(&m()).unwrap();
    assert!((r.angle_to(&Rotation::identity()) - std::f64::consts::PI).abs() < 1e-12);
    assert!((r.apply(&E_Z) + E_Z).norm() < 1e-15);
    assert!(undesired_init(&UnitVec3::e_z()).is_err());
}

/// The closed-form error flow reproduces a simulated first-order observer,
/// and a wrong gain does not.
#[test]
fn error_flow_tracks_the_simulated_observer() {
    let mut cfg = ScenarioConfig::comparison(0);
    cfg.trajectory.dt = 1e-3;
    cfg.trajectory.duration = 3.0;
    cfg.noise = NoiseConfig::Off(NoNoise::None);
    let sc = simulate(&cfg, 0).unwrap();
    let g = AttitudeGains::new(10.0, 8.0, 5.0).unwrap();
    let alpha1 = 15.0;
    let stage = TwoStepGains::new(vec![alpha1], 20.0).unwrap();
    let x2 = sc.truth[0].tilt();
    let prime = x2 + Vec3::new(0.2, -0.1, 0.05);
    let ts = TwoStepObserver::new(stage, G0, sc.samples[0].y_v, prime, UnitVec3::new_unchecked(x2));
    let rhat0 = exp_so3(&Vec3::new(0.5, 1.0, -0.7)).compose(&sc.truth[0].r);
    let mut obs = AttitudeObserver::new(g, m(), TiltStage::TwoStep(ts), rhat0);
    let mut rhat = vec![obs.rhat()];
    for w in sc.samples.windows(2) {
        obs.step(&Hold::Linear(&w[0], &w[1]), 1e-3);
        rhat.push(obs.attitude().unwrap());
    }
    let truth: Vec<Rotation> = sc.truth.iter().map(|s| s.r).collect();
    let z0 = sc.truth[0].r.apply(&(x2 - prime));
    let w = build_wrho(g.rho1, g.rho2, &m()).unwrap().matrix;
    let dev = consistency_check(&truth, &rhat, z0, &g, alpha1, &w, 1e-3).unwrap();
    assert!(dev < 1e-5, "{dev:e}");
    let wrong = consistency_check(&truth, &rhat, z0, &g, alpha1, &(w * 1.5), 1e-3).unwrap();
    assert!(wrong > 1e-2, "{wrong:e}");
}
