use nalgebra::{Complex, SMatrix, SymmetricEigen};

use crate::attitude::{quat_error_rhs, AttitudeGains, QuatErrorState};
use crate::error::{Error, Result};
use crate::quat::Quat;
use crate::so3::{angle_between, skew, Mat3, Rotation, UnitVec3, Vec3, COLLINEAR_EPS, E_Z};

/// `W_ρ = −ρ₁S²(e_z) − ρ₂S²(m)` with its eigenpairs in ascending order.
#[derive(Clone, Debug)]
pub struct Wrho {
    pub rho1: f64,
    pub rho2: f64,
    pub matrix: Mat3,
    pub eigenvalues: [f64; 3],
    /// Unit eigenvectors as columns, forming a right-handed frame.
    pub eigenvectors: Mat3,
}

pub fn build_wrho(rho1: f64, rho2: f64, m: &UnitVec3) -> Result<Wrho> {
    if !(rho1 > 0.0 && rho2 > 0.0) {
        return Err(Error::InvalidParameter(format!("ρ₁ and ρ₂ must be positive, got ({rho1}, {rho2})")));
    }
    let angle = angle_between(&E_Z, m);
    if !(COLLINEAR_EPS..=std::f64::consts::PI - COLLINEAR_EPS).contains(&angle) {
        return Err(Error::Collinear(angle));
    }
    let (se, sm) = (skew(&E_Z), skew(m));
    let matrix = -(se * se) * rho1 - sm * sm * rho2;
    let eig = SymmetricEigen::new(matrix);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.map(|k| eig.eigenvalues[k]);
    let mut eigenvectors = Mat3::from_columns(&order.map(|k| eig.eigenvectors.column(k).into_owned()));
    if eigenvectors.determinant() < 0.0 {
        eigenvectors.set_column(2, &-eigenvectors.column(2));
    }
    Ok(Wrho { rho1, rho2, matrix, eigenvalues, eigenvectors })
}

impl Wrho {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn eigenvector(&self, j: usize) -> Vec3 {
        self.eigenvectors.column(j).into_owned()
    }

    /// `max_j ‖W v_j − λ_j v_j‖`.
    pub fn residual(&self) -> f64 {
        (0..3).map(|j| (self.matrix * self.eigenvector(j) - self.eigenvector(j) * self.eigenvalues[j]).norm()).fold(0.0, f64::max)
    }

    /// Expresses a world-frame error state in the eigenbasis of `W`.
    pub fn to_principal(&self, xi: &QuatErrorState) -> QuatErrorState {
        let vt = self.eigenvectors.transpose();
        QuatErrorState { z_p1: vt * xi.z_p1, q: Quat::new(xi.q.w, vt * xi.q.v) }
    }

    pub fn from_principal(&self, xi: &QuatErrorState) -> QuatErrorState {
        let v = self.eigenvectors;
        QuatErrorState { z_p1: v * xi.z_p1, q: Quat::new(xi.q.w, v * xi.q.v) }
    }
}

/// The half-turn `R̃₃ = 2uuᵀ − I` about `u = (m × e_z)/‖m × e_z‖`.
pub fn undesired_init(m: &UnitVec3) -> Result<Rotation> {
    let c = m.cross(&E_Z);
    let n = c.norm();
    if n < COLLINEAR_EPS {
        return Err(Error::Collinear(n));
    }
    let u = c / n;
    Ok(Rotation::from_matrix_unchecked(u * u.transpose() * 2.0 - Mat3::identity()))
}

pub type Mat7 = SMatrix<f64, 7, 7>;

/// Linearized error flow at the undesired equilibrium `(0, (0, v_j))`, state
/// order `(z_p₁, q̃₀, q̃)`.
#[derive(Clone, Debug)]
pub struct LinearizationA {
    pub matrix: Mat7,
    pub eigenvalues: Vec<Complex<f64>>,
    pub v_perp: Vec3,
}

impl LinearizationA {
    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_index(j: usize) -> Result<()> {
    if j < 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eigen index must be 0, 1 or 2, got {j}")))
    }
}

/// Block matrix of the linearization at `(0, (0, v_j))`, `j` indexing the
/// ascending eigenpairs of `W_ρ`.
pub fn linearization_a(w: &Wrho, j: usize, g: &AttitudeGains, alpha1: f64) -> Result<LinearizationA> {
    check_index(j)?;
    if !(g.rho2 > 0.0) {
        return Err(Error::InvalidParameter("linearization requires ρ₂ > 0".into()));
    }
    let v = w.eigenvector(j);
    let l = w.eigenvalues[j];
    let r = g.mu / g.rho2;
    let vp = skew(&v) * E_Z;
    let vz = v.dot(&E_Z);
    let shifted = Mat3::identity() * l - w.matrix;
    let mut a = Mat7::zeros();
    a.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Mat3::identity() * -alpha1));
    a.fixed_view_mut::<1, 3>(3, 0).copy_from(&(vp.transpose() * (-0.5 * g.rho1)));
    a[(3, 3)] = l * (1.0 + r * vz * vz);
    a.fixed_view_mut::<1, 3>(3, 4).copy_from(&(vp.transpose() * shifted * (-r * vz)));
    let lower = skew(&v) * skew(&E_Z) * (Mat3::identity() - v * v.transpose() * 2.0) * (0.5 * g.rho1);
    a.fixed_view_mut::<3, 3>(4, 0).copy_from(&lower);
    a.fixed_view_mut::<3, 1>(4, 3).copy_from(&(vp * (-l * r * vz)));
    a.fixed_view_mut::<3, 3>(4, 4).copy_from(&((Mat3::identity() + vp * vp.transpose() * r) * shifted));
    let eigenvalues = a.complex_eigenvalues().iter().copied().collect();
    Ok(LinearizationA { matrix: a, eigenvalues, v_perp: vp })
}

/// Central-difference Jacobian of [`quat_error_rhs`] at `(0, (0, v_j))`.
pub fn linearization_fd(w: &Wrho, j: usize, g: &AttitudeGains, alpha1: f64, h: f64) -> Result<Mat7> {
    check_index(j)?;
    let mut x0 = [0.0; 7];
    x0[4..].copy_from_slice(w.eigenvector(j).as_slice());
    let f = |x: &[f64; 7]| -> Result<[f64; 7]> {
        let xi = QuatErrorState { z_p1: Vec3::new(x[0], x[1], x[2]), q: Quat::new(x[3], Vec3::new(x[4], x[5], x[6])) };
        let r = quat_error_rhs(&xi, g, alpha1, &w.matrix)?;
        Ok([r.z_p1.x, r.z_p1.y, r.z_p1.z, r.q0, r.q.x, r.q.y, r.q.z])
    };
    let mut jac = Mat7::zeros();
    for k in 0..7 {
        let (mut plus, mut minus) = (x0, x0);
        plus[k] += h;
        minus[k] -= h;
        let (fp, fm) = (f(&plus)?, f(&minus)?);
        for i in 0..7 {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
