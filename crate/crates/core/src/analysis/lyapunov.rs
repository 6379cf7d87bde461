use nalgebra::{DMatrix, DVector};

use crate::attitude::QuatErrorRate;
use crate::so3::{skew, Mat3, Vec3, E_Z};

/// `‖z_p₁‖²/(2α₁) + ‖z₂‖²/(2γ)`.
pub fn lyapunov_v1(z_p1: &Vec3, z2: &Vec3, alpha1: f64, gamma: f64) -> f64 {
    z_p1.norm_squared() / (2.0 * alpha1) + z2.norm_squared() / (2.0 * gamma)
}

/// `ψᵀPψ + ‖z₂‖²/(2γ)` with `ψ = (z_p₁, …, z_pₙ)` stacked.
pub fn lyapunov_vn(psi: &[Vec3], z2: &Vec3, p: &DMatrix<f64>, gamma: f64) -> f64 {
    let x = DVector::from_iterator(psi.len() * 3, psi.iter().flat_map(|v| v.iter().copied()));
    (x.transpose() * p * &x)[(0, 0)] + z2.norm_squared() / (2.0 * gamma)
}

/// `(ρ₁²/α₁)‖z_p₁‖² + 2q̃ᵀWq̃`.
pub fn lyapunov_att(z_p1: &Vec3, q: &Vec3, w: &Mat3, rho1: f64, alpha1: f64) -> f64 {
    rho1 * rho1 / alpha1 * z_p1.norm_squared() + 2.0 * q.dot(&(w * q))
}

/// `ϖ = (q̃₀I − S(q̃)) W q̃`.
pub fn varpi(q0: f64, q: &Vec3, w: &Mat3) -> Vec3 {
    (Mat3::identity() * q0 - skew(q)) * w * q
}

/// Exact derivative of [`lyapunov_att`] along a flow rate.
pub fn attitude_vdot(z_p1: &Vec3, q: &Vec3, rate: &QuatErrorRate, w: &Mat3, rho1: f64, alpha1: f64) -> f64 {
    2.0 * rho1 * rho1 / alpha1 * z_p1.dot(&rate.z_p1) + 4.0 * q.dot(&(w * rate.q))
}

/// `−2ρ₁²‖z_p₁‖² − 4‖ϖ‖² + 2ρ₁‖ϖ‖‖z_p₁‖`, an upper bound of [`attitude_vdot`].
pub fn attitude_vdot_bound(z_p1: &Vec3, varpi: &Vec3, rho1: f64) -> f64 {
    let (a, b) = (z_p1.norm(), varpi.norm());
    -2.0 * rho1 * rho1 * a * a - 4.0 * b * b + 2.0 * rho1 * a * b
}

/// `½‖αz₁ + g₀z₂‖² + ½g₀²‖z₂‖²` for the one-step error `(z₁, z₂)`.
pub fn lyapunov_one_step(z1: &Vec3, z2: &Vec3, alpha: f64, g0: f64) -> f64 {
    0.5 * (z1 * alpha + z2 * g0).norm_squared() + 0.5 * g0 * g0 * z2.norm_squared()
}

/// Closed form of its derivative on `‖e_z − z₂‖ = 1`, with `G₀ = γg₀/α²`:
/// `−α(1−G₀)‖u‖² + αg₀²G₀ z₂ᵀS²(e_z)z₂ − αG₀(uᵀ(e_z − z₂))²`, `u = αz₁ + g₀z₂`.
pub fn lyapunov_one_step_dot(z1: &Vec3, z2: &Vec3, alpha: f64, gamma: f64, g0: f64) -> f64 {
    let g = gamma * g0 / (alpha * alpha);
    let u = z1 * alpha + z2 * g0;
    let se = skew(&E_Z);
    let proj = u.dot(&(E_Z - z2));
    -alpha * (1.0 - g) * u.norm_squared() + alpha * g0 * g0 * g * z2.dot(&(se * se * z2)) - alpha * g * proj * proj
}
