use crate::error::{Error, Result};
use crate::ode::{rk4_autonomous, OdeState};
use crate::quat::{quat_to_rot, rot_to_quat, Quat};
use crate::so3::{skew, Mat3, Rotation, Vec3, E_Z};

use super::AttitudeGains;

/// Attitude error `Q̃` (of `R̃ = R R̂ᵀ`) together with the first-stage error `z_p₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuatErrorState {
    pub z_p1: Vec3,
    pub q: Quat,
}

/// Time derivatives of `(z_p₁, q̃₀, q̃)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuatErrorRate {
    pub z_p1: Vec3,
    pub q0: f64,
    pub q: Vec3,
}

impl OdeState for QuatErrorState {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        QuatErrorState { z_p1: self.z_p1 + rate.z_p1 * h, q: Quat::new(self.q.w + rate.q.w * h, self.q.v + rate.q.v * h) }
    }
}

/// Closed-loop error dynamics of the attitude observer with a first-order
/// tilt stage, noise-free:
///
/// ```text
/// ż_p₁ = −α₁ z_p₁
/// q̃̇₀  =  q̃ᵀKϖ + ½ρ₁ q̃ᵀS(e_z)R̃ᵀz_p₁
/// q̃̇   = −(q̃₀I + S(q̃))(Kϖ + ½ρ₁ S(e_z)R̃ᵀz_p₁)
/// ```
///
/// with `ϖ = (q̃₀I − S(q̃)) W q̃` and `K = I + (μ/ρ₂) e_z e_zᵀ`.
/// The `μ/ρ₂` ratio makes this undefined for `ρ₂ = 0, μ > 0`.
pub fn quat_error_rhs(xi: &QuatErrorState, g: &AttitudeGains, alpha1: f64, w: &Mat3) -> Result<QuatErrorRate> {
    let k = if g.mu == 0.0 {
        Mat3::identity()
    } else if g.rho2 > 0.0 {
        Mat3::identity() + E_Z * E_Z.transpose() * (g.mu / g.rho2)
    } else {
        return Err(Error::InvalidParameter("error flow requires ρ₂ > 0 when μ > 0".into()));
    };
    Ok(rhs_principal(xi, g.rho1, alpha1, w, &k, &E_Z))
}

/// The same flow expressed in a rotated world frame in which the vertical is `ez`.
pub(crate) fn rhs_principal(xi: &QuatErrorState, rho1: f64, alpha1: f64, w: &Mat3, k: &Mat3, ez: &Vec3) -> QuatErrorRate {
    let (q0, q) = (xi.q.w, xi.q.v);
    let sq = skew(&q);
    let varpi = (Mat3::identity() * q0 - sq) * w * q;
    let rt_t = Mat3::identity() - sq * (2.0 * q0) + sq * sq * 2.0;
    let drive = k * varpi + skew(ez) * rt_t * xi.z_p1 * (0.5 * rho1);
    QuatErrorRate { z_p1: -xi.z_p1 * alpha1, q0: q.dot(&drive), q: -(Mat3::identity() * q0 + sq) * drive }
}

/// RK4 integration of [`quat_error_rhs`] with the quaternion renormalized each step.
pub fn integrate_quat_error(
    xi0: QuatErrorState,
    g: &AttitudeGains,
    alpha1: f64,
    w: &Mat3,
    dt: f64,
    steps: usize,
) -> Result<Vec<QuatErrorState>> {
    quat_error_rhs(&xi0, g, alpha1, w)?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = xi0;
    out.push(x);
    for _ in 0..steps {
        x = rk4_autonomous(&x, dt, |s| {
            let r = quat_error_rhs(s, g, alpha1, w).expect("validated above");
            QuatErrorState { z_p1: r.z_p1, q: Quat::new(r.q0, r.q) }
        });
        x.q = x.q.normalized();
        out.push(x);
    }
    Ok(out)
}

/// Integrates the error flow from the observer's initial error and returns the
/// largest geodesic angle between it and the observer's actual error `R R̂ᵀ`.
///
/// `truth` and `rhat` must be aligned on the same uniform grid of spacing `dt`,
/// from a noise-free run with a first-order tilt stage whose initial
/// first-stage error is `z_p1_0`.
pub fn consistency_check(
    truth: &[Rotation],
    rhat: &[Rotation],
    z_p1_0: Vec3,
    g: &AttitudeGains,
    alpha1: f64,
    w: &Mat3,
    dt: f64,
) -> Result<f64> {
    if truth.len() != rhat.len() || truth.is_empty() {
        return Err(Error::InvalidParameter("traces must be non-empty and of equal length".into()));
    }
    let error = |k: usize| rot_to_quat(&(truth[k].matrix() * rhat[k].matrix().transpose()));
    let xi0 = QuatErrorState { z_p1: z_p1_0, q: error(0)? };
    let flow = integrate_quat_error(xi0, g, alpha1, w, dt, truth.len() - 1)?;
    let mut worst = 0.0f64;
    for (k, xi) in flow.iter().enumerate() {
        worst = worst.max(error(k)?.angle_to(&xi.q));
    }
    Ok(worst)
}

/// `R̃` of a flow state.
pub fn error_rotation(xi: &QuatErrorState) -> Rotation {
    quat_to_rot(&xi.q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> Mat3 {
        Mat3::new(30.0, 0.0, -10.0, 0.0, 40.0, 0.0, -10.0, 0.0, 10.0)
    }

    #[test]
    fn identity_is_equilibrium() {
        let g = AttitudeGains::invariant(20.0, 20.0).unwrap();
        let xi = QuatErrorState { z_p1: Vec3::zeros(), q: Quat::identity() };
        let r = quat_error_rhs(&xi, &g, 28.0, &w()).unwrap();
        assert_eq!((r.z_p1, r.q0, r.q), (Vec3::zeros(), 0.0, Vec3::zeros()));
    }

    #[test]
    fn undefined_ratio_rejected() {
        let g = AttitudeGains::hierarchic(20.0, 20.0).unwrap();
        let xi = QuatErrorState { z_p1: Vec3::zeros(), q: Quat::identity() };
        assert!(quat_error_rhs(&xi, &g, 28.0, &w()).is_err());
    }

    #[test]
    fn flow_is_tangent_to_s3() {
        let g = AttitudeGains::new(20.0, 20.0, 7.0).unwrap();
        let q = Quat::new(0.3, Vec3::new(-0.5, 0.7, 0.2)).normalized();
        let xi = QuatErrorState { z_p1: Vec3::new(0.3, -1.0, 2.0), q };
        let r = quat_error_rhs(&xi, &g, 28.0, &w()).unwrap();
        assert!((q.w * r.q0 + q.v.dot(&r.q)).abs() < 1e-12);
    }
}
