use proptest::prelude::*;
use velatt::analysis::{renormalize_z2, tilt_flow_rhs, TiltFlowState};
use velatt::companion::{binomial_gains, companion, lyapunov_residual, solve_lyapunov};
use velatt::quat::{quat_mul, quat_to_rot, rot_to_quat, Quat};
use velatt::so3::*;

fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-scale..scale).prop_map(Vec3::from)
}

fn rotation() -> impl Strategy<Value = Rotation> {
    vec3(4.0).prop_map(|v| exp_so3(&v))
}

fn unit() -> impl Strategy<Value = UnitVec3> {
    vec3(1.0).prop_filter("away from zero", |v| v.norm() > 1e-3).prop_map(|v| normalize_s2(&v).unwrap())
}

proptest! {
    #[test]
    fn exp_stays_on_so3(v in vec3(10.0)) {
        let r = exp_so3(&v);
        prop_assert!(r.orthonormality_error() < 1e-13);
        prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn skew_identities_hold(v in vec3(5.0), w in vec3(5.0), r in rotation()) {
        prop_assert!(check_skew_identities(&v, &w, &r));
    }

    #[test]
    fn quaternion_round_trip(r in rotation()) {
        let q = rot_to_quat(r.matrix()).unwrap();
        prop_assert!((q.norm_squared() - 1.0).abs() < 1e-14);
        prop_assert!((quat_to_rot(&q).matrix() - r.matrix()).amax() < 1e-13);
    }

    #[test]
    fn quaternion_product_is_composition(a in rotation(), b in rotation()) {
        let (qa, qb) = (rot_to_quat(a.matrix()).unwrap(), rot_to_quat(b.matrix()).unwrap());
        let lhs = quat_to_rot(&quat_mul(&qa, &qb));
        prop_assert!((lhs.matrix() - a.compose(&b).matrix()).amax() < 1e-13);
    }

    #[test]
    fn projection_recovers_perturbed_rotation(r in rotation(), noise in prop::array::uniform9(-1e-6..1e-6f64)) {
        let m = r.matrix() + Mat3::from_row_slice(&noise);
        let p = project_so3(&m).unwrap();
        prop_assert!(p.orthonormality_error() < 1e-14);
        prop_assert!(p.angle_to(&r) < 1e-5);
    }

    #[test]
    fn triad_inverts_exact_observations(r in rotation(), m in unit()) {
        prop_assume!(angle_between(&E_Z, &m) > 0.05 && angle_between(&E_Z, &m) < 3.09);
        let tilt = UnitVec3::new_unchecked(r.inverse_apply(&E_Z));
        let mag = UnitVec3::new_unchecked(r.inverse_apply(&m));
        let rhat = triad(&tilt, &mag, &UnitVec3::e_z(), &m).unwrap();
        prop_assert!(rhat.angle_to(&r) < 1e-12);
    }

    #[test]
    fn normalization_is_unit(v in vec3(100.0)) {
        prop_assume!(v.norm() > 1e-6);
        prop_assert!((normalize_s2(&v).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lyapunov_solution_for_real_poles(poles in prop::collection::vec(0.1..30.0f64, 1..5)) {
        // Expand Π(s + pᵢ) into companion gains α₁ (constant) … αₙ.
        let mut coeffs = vec![1.0];
        for p in &poles {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k] += c * p;
                next[k + 1] += c;
            }
            coeffs = next;
        }
        let alphas = &coeffs[..poles.len()];
        let sys = companion(alphas).unwrap();
        let p = solve_lyapunov(&sys).unwrap();
        let scale = p.amax().max(1.0);
        prop_assert!(lyapunov_residual(&sys, &p) <= 1e-8 * scale);
        let slowest = poles.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!((sys.re_alpha() - slowest).abs() < 1e-3 * slowest.max(1.0));
    }

    #[test]
    fn tilt_flow_keeps_sphere(zp in vec3(3.0), x in unit()) {
        let z2 = E_Z - *x;
        let rate = tilt_flow_rhs(&TiltFlowState { zp: vec![zp], z2 }, &[5.0], 2.0);
        // The tilt error moves tangentially to the sphere ‖e_z − z₂‖ = 1.
        prop_assert!((E_Z - z2).dot(&rate.z2).abs() < 1e-12 * rate.z2.norm().max(1.0));
        let stepped = renormalize_z2(&(z2 + rate.z2 * 1e-3));
        prop_assert!(((E_Z - stepped).norm() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn binomial_gains_are_hurwitz() {
    for n in 1..=4 {
        let sys = companion(&binomial_gains(n, 28.0)).unwrap();
        assert!((sys.re_alpha() - 28.0).abs() < 0.5, "order {n}: {}", sys.re_alpha());
    }
}

#[test]
fn quaternion_sign_is_irrelevant_to_angle() {
    let q = rot_to_quat(exp_so3(&Vec3::new(0.2, 0.1, -0.3)).matrix()).unwrap();
    assert!(q.angle_to(&q.neg()) < 1e-7);
    assert!(q.angle_to(&Quat::identity()) > 0.3);
}
