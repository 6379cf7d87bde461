use crate::attitude::{AttitudeGains, QuatErrorState};
use crate::error::{Error, Result};
use crate::ode::{rk4_autonomous, OdeState};
use crate::quat::Quat;
use crate::so3::{skew, Mat3, Vec3, E_Z};

use super::Wrho;

/// Error state `(z_p₁ … z_pₙ, z₂)` of the two-step observers.
#[derive(Clone, Debug, PartialEq)]
pub struct TiltFlowState {
    pub zp: Vec<Vec3>,
    pub z2: Vec3,
}

impl OdeState for TiltFlowState {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        TiltFlowState { zp: self.zp.add_scaled(&rate.zp, h), z2: self.z2 + rate.z2 * h }
    }
}

/// `ż_pᵢ = z_p₍ᵢ₊₁₎`, `ż_pₙ = −Σ αᵢ z_pᵢ` (or `ż_p₁ = −α₁z_p₁` for n = 1),
/// `ż₂ = γ S²(e_z − z₂)(z₂ − z_p₁)`.
pub fn tilt_flow_rhs(x: &TiltFlowState, alphas: &[f64], gamma: f64) -> TiltFlowState {
    let n = alphas.len();
    let mut zp: Vec<Vec3> = x.zp[1..].to_vec();
    zp.push(-x.zp.iter().zip(alphas).map(|(z, a)| z * *a).sum::<Vec3>());
    let s = skew(&(E_Z - x.z2));
    let z2 = s * s * (x.z2 - x.zp[0]) * gamma;
    debug_assert_eq!(zp.len(), n);
    TiltFlowState { zp, z2 }
}

/// Restores `‖e_z − z₂‖ = 1` without cancellation near either equilibrium.
pub fn renormalize_z2(z2: &Vec3) -> Vec3 {
    let d = z2.norm_squared() - 2.0 * z2.z;
    if d == 0.0 {
        return *z2;
    }
    let s = (1.0 + d).sqrt();
    z2 + (E_Z - z2) * (d / (s * (1.0 + s)))
}

fn check_steps(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")))
    }
}

pub fn integrate_tilt_flow(
    x0: TiltFlowState,
    alphas: &[f64],
    gamma: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<TiltFlowState>> {
    check_steps(dt)?;
    if x0.zp.len() != alphas.len() {
        return Err(Error::InvalidParameter(format!("{} error blocks for {} gains", x0.zp.len(), alphas.len())));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0;
    out.push(x.clone());
    for _ in 0..steps {
        x = rk4_autonomous(&x, dt, |s| tilt_flow_rhs(s, alphas, gamma));
        x.z2 = renormalize_z2(&x.z2);
        out.push(x.clone());
    }
    Ok(out)
}

/// Error `(z₁, z₂)` of the one-step and Hua observers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneStepFlow {
    pub z1: Vec3,
    pub z2: Vec3,
}

impl OdeState for OneStepFlow {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        OneStepFlow { z1: self.z1 + rate.z1 * h, z2: self.z2 + rate.z2 * h }
    }
}

/// `ż₁ = −k₁ᵛz₁ − g₀z₂ + k₂ᵛS²(e_z − z₂)z₁`, `ż₂ = −k₁ʳS²(e_z − z₂)z₁`;
/// the one-step observer is `(k₁ᵛ, k₂ᵛ, k₁ʳ) = (α, 0, γ)`.
pub fn one_step_flow_rhs(x: &OneStepFlow, k1v: f64, k2v: f64, k1r: f64, g0: f64) -> OneStepFlow {
    let s = skew(&(E_Z - x.z2));
    let s2z1 = s * (s * x.z1);
    OneStepFlow { z1: -x.z1 * k1v - x.z2 * g0 + s2z1 * k2v, z2: -s2z1 * k1r }
}

pub fn integrate_one_step_flow(
    x0: OneStepFlow,
    (k1v, k2v, k1r): (f64, f64, f64),
    g0: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<OneStepFlow>> {
    check_steps(dt)?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..steps {
        x = rk4_autonomous(&x, dt, |s| one_step_flow_rhs(s, k1v, k2v, k1r, g0));
        x.z2 = renormalize_z2(&x.z2);
        out.push(x);
    }
    Ok(out)
}

/// Integrates the attitude error flow in the eigenbasis of `W_ρ`, where `W_ρ`
/// is exactly diagonal and its eigenvectors are the coordinate axes.
///
/// Both `xi0` and the returned states are principal-frame coordinates; use
/// [`Wrho::from_principal`] to map back. Equilibria `(0, (0, ±e_j))` are then
/// fixed points in floating point, not just up to rounding.
pub fn integrate_principal_attitude_flow(
    xi0: QuatErrorState,
    w: &Wrho,
    g: &AttitudeGains,
    alpha1: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<QuatErrorState>> {
    check_steps(dt)?;
    let ez = w.eigenvectors.transpose() * E_Z;
    let k = Mat3::identity() + ez * ez.transpose() * (g.mu / g.rho2);
    let diag = Mat3::from_diagonal(&Vec3::from(w.eigenvalues));
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = xi0;
    out.push(x);
    for _ in 0..steps {
        x = rk4_autonomous(&x, dt, |s| {
            let r = crate::attitude::rhs_principal(s, g.rho1, alpha1, &diag, &k, &ez);
            QuatErrorState { z_p1: r.z_p1, q: Quat::new(r.q0, r.q) }
        });
        let n2 = x.q.norm_squared();
        if n2 != 1.0 {
            x.q = x.q.normalized();
        }
        out.push(x);
    }
    Ok(out)
}
