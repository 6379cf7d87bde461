//! Scalar-first Hamilton unit quaternions.
//!
//! The product is chosen so that `quat_to_rot(a ⊙ b) = quat_to_rot(a) · quat_to_rot(b)`;
//! with it the attitude error `Q̃ = Q ⊙ Q̂⁻¹` maps to `R̃ = R R̂ᵀ`.

use crate::error::{Error, Result};
use crate::so3::{orthonormality_error, skew, Mat3, Rotation, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub v: Vec3,
}

impl Quat {
    pub const fn new(w: f64, v: Vec3) -> Self {
        Quat { w, v }
    }

    pub fn identity() -> Self {
        Quat { w: 1.0, v: Vec3::zeros() }
    }

    pub fn norm_squared(&self) -> f64 {
        self.w * self.w + self.v.norm_squared()
    }

    pub fn conjugate(&self) -> Self {
        Quat { w: self.w, v: -self.v }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_squared().sqrt();
        Quat { w: self.w / n, v: self.v / n }
    }

    pub fn neg(&self) -> Self {
        Quat { w: -self.w, v: -self.v }
    }

    pub fn dot(&self, other: &Quat) -> f64 {
        self.w * other.w + self.v.dot(&other.v)
    }

    /// Rotation angle between the rotations represented by `self` and `other`,
    /// insensitive to the double-cover sign.
    pub fn angle_to(&self, other: &Quat) -> f64 {
        let rel = quat_mul(&self.conjugate(), other);
        2.0 * rel.v.norm().atan2(rel.w.abs())
    }
}

/// Hamilton product `a ⊙ b`.
pub fn quat_mul(a: &Quat, b: &Quat) -> Quat {
    Quat { w: a.w * b.w - a.v.dot(&b.v), v: b.v * a.w + a.v * b.w + a.v.cross(&b.v) }
}

/// `R = I + 2 q₀ S(q) + 2 S²(q)`.
pub fn quat_to_rot(q: &Quat) -> Rotation {
    let s = skew(&q.v);
    Rotation::from_matrix_unchecked(Mat3::identity() + s * (2.0 * q.w) + s * s * 2.0)
}

/// Inverse of [`quat_to_rot`] up to sign (Shepperd's branch selection).
pub fn rot_to_quat(m: &Mat3) -> Result<Quat> {
    let err = orthonormality_error(m);
    let det = m.determinant();
    if err > 1e-6 || (det - 1.0).abs() > 1e-6 {
        return Err(Error::NotARotation { orthonormality: err, det });
    }
    let tr = m.trace();
    let q = if tr > m[(0, 0)] && tr > m[(1, 1)] && tr > m[(2, 2)] {
        let s = 2.0 * (1.0 + tr).sqrt();
        Quat::new(
            0.25 * s,
            Vec3::new((m[(2, 1)] - m[(1, 2)]) / s, (m[(0, 2)] - m[(2, 0)]) / s, (m[(1, 0)] - m[(0, 1)]) / s),
        )
    } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
        let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
        Quat::new(
            (m[(2, 1)] - m[(1, 2)]) / s,
            Vec3::new(0.25 * s, (m[(0, 1)] + m[(1, 0)]) / s, (m[(0, 2)] + m[(2, 0)]) / s),
        )
    } else if m[(1, 1)] >= m[(2, 2)] {
        let s = 2.0 * (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt();
        Quat::new(
            (m[(0, 2)] - m[(2, 0)]) / s,
            Vec3::new((m[(0, 1)] + m[(1, 0)]) / s, 0.25 * s, (m[(1, 2)] + m[(2, 1)]) / s),
        )
    } else {
        let s = 2.0 * (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt();
        Quat::new(
            (m[(1, 0)] - m[(0, 1)]) / s,
            Vec3::new((m[(0, 2)] + m[(2, 0)]) / s, (m[(1, 2)] + m[(2, 1)]) / s, 0.25 * s),
        )
    };
    Ok(q.normalized())
}
