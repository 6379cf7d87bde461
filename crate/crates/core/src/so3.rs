//! Manifold-aware linear algebra on SO(3) and S².
//!
//! Vectors and matrices are plain `nalgebra` values; the newtypes
//! [`Rotation`] and [`UnitVec3`] carry the manifold invariants.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Upward unit vertical of the world frame.
pub const E_Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

/// Tolerance on ‖RᵀR − I‖_F and |det R − 1| for a valid rotation.
pub const ROTATION_TOL: f64 = 1e-9;

/// Tolerance on |‖v‖ − 1| for a valid unit vector.
pub const UNIT_TOL: f64 = 1e-9;

/// Smallest norm [`normalize_s2`] accepts.
pub const NORM_EPS: f64 = 1e-9;

/// Minimum angle (rad) between the two TRIAD directions.
pub const COLLINEAR_EPS: f64 = 1e-6;

/// Matrix of the cross product: `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Angle in `[0, π]` between two non-zero vectors (atan2 form, stable near 0 and π).
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// A rotation matrix from the local (sensor) frame to the world frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Wraps `m` without any check. Callers guarantee `m ∈ SO(3)`.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    /// Wraps `m` after checking the rotation invariants at [`ROTATION_TOL`].
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let err = orthonormality_error(&m);
        let det = m.determinant();
        if err > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::NotARotation { orthonormality: err, det });
        }
        Ok(Rotation(m))
    }

    /// Rotation of `angle` radians about the world vertical.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation(Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    #[inline]
    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    #[inline]
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    #[inline]
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// `Rᵀ v`, i.e. a world vector expressed in the local frame.
    #[inline]
    pub fn inverse_apply(&self, v: &Vec3) -> Vec3 {
        self.0.tr_mul(v)
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }

    /// Geodesic distance (rotation angle of `self · otherᵀ`).
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        let rel = self.0 * other.0.transpose();
        let c = 0.5 * (rel.trace() - 1.0);
        let s = 0.5 * Vec3::new(rel[(2, 1)] - rel[(1, 2)], rel[(0, 2)] - rel[(2, 0)], rel[(1, 0)] - rel[(0, 1)]).norm();
        s.atan2(c)
    }

    /// Flattened row-major entries.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }

    pub fn from_row_major_unchecked(e: &[f64]) -> Rotation {
        Rotation(Mat3::new(e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8]))
    }
}

/// ‖MᵀM − I‖_F.
pub fn orthonormality_error(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// A vector of unit length (an element of S²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub fn new_unchecked(v: Vec3) -> Self {
        UnitVec3(v)
    }

    #[inline]
    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    #[inline]
    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    pub fn e_z() -> Self {
        UnitVec3(E_Z)
    }
}

impl std::ops::Deref for UnitVec3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

/// `v / ‖v‖`, refusing norms below [`NORM_EPS`].
pub fn normalize_s2(v: &Vec3) -> Result<UnitVec3> {
    let n = v.norm();
    if !(n >= NORM_EPS) {
        return Err(Error::NearZeroNorm(n));
    }
    Ok(UnitVec3(v / n))
}

/// Rodrigues formula for `exp(S(v))`.
pub fn exp_so3(v: &Vec3) -> Rotation {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        (1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0, 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let s = skew(v);
    Rotation(Mat3::identity() + s * a + s * s * b)
}

/// Inverse of the right Jacobian of SO(3): if `R(t) = R₀ exp(S(θ(t)))` and
/// `Ṙ = R S(ω)`, then `θ̇ = J_r⁻¹(θ) ω`.
pub fn right_jacobian_inv(theta: &Vec3) -> Mat3 {
    let t2 = theta.norm_squared();
    let t = t2.sqrt();
    let c = if t < 1e-4 {
        1.0 / 12.0 + t2 / 720.0
    } else {
        1.0 / t2 - (1.0 + t.cos()) / (2.0 * t * t.sin())
    };
    let s = skew(theta);
    Mat3::identity() + s * 0.5 + s * s * c
}

/// Nearest rotation in Frobenius norm, by Newton iteration on the polar factor
/// `M ← ½(M + M⁻ᵀ)`.
pub fn project_so3(m: &Mat3) -> Result<Rotation> {
    let det = m.determinant();
    if !(det > 1e-6) {
        return Err(Error::DegenerateMatrix(det));
    }
    let mut x = *m;
    for _ in 0..64 {
        let inv_t = match x.try_inverse() {
            Some(inv) => inv.transpose(),
            None => return Err(Error::DegenerateMatrix(x.determinant())),
        };
        let next = (x + inv_t) * 0.5;
        let delta = (next - x).norm();
        x = next;
        if delta <= 1e-15 {
            break;
        }
    }
    Ok(Rotation(x))
}

/// Re-orthonormalizes only when the drift exceeds a small fraction of the
/// rotation tolerance; otherwise returns `r` untouched.
pub fn reproject_if_drifted(r: Rotation) -> Rotation {
    if r.orthonormality_error() > 1e-12 {
        project_so3(r.matrix()).unwrap_or(r)
    } else {
        r
    }
}

/// Two-vector attitude reconstruction with the tilt direction prioritized.
///
/// `tilt` and `mag` are the local-frame observations of the world directions
/// `e_z` and `m`. The returned `R̂` satisfies `R̂ᵀ e_z = tilt` and places `R̂ᵀ m`
/// in the half-plane spanned by `tilt` and `mag`.
pub fn triad(tilt: &UnitVec3, mag: &UnitVec3, e_z: &UnitVec3, m: &UnitVec3) -> Result<Rotation> {
    let body = triad_frame(tilt, mag)?;
    let world = triad_frame(e_z, m)?;
    Ok(Rotation(world * body.transpose()))
}

fn triad_frame(first: &UnitVec3, second: &UnitVec3) -> Result<Mat3> {
    let cross = first.cross(second);
    let angle = angle_between(first, second);
    if !(COLLINEAR_EPS..=std::f64::consts::PI - COLLINEAR_EPS).contains(&angle) {
        return Err(Error::Collinear(angle.min(std::f64::consts::PI - angle)));
    }
    let t1 = *first.as_vec();
    let t2 = cross / cross.norm();
    let t3 = t1.cross(&t2);
    Ok(Mat3::from_columns(&[t1, t2, t3]))
}

/// One side-by-side evaluation of a skew-matrix identity.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: Mat3,
    pub rhs: Mat3,
}

impl IdentityCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).amax()
    }
}

/// Both sides of the skew identities used throughout the error analysis.
pub fn skew_identities(v: &Vec3, w: &Vec3, r: &Rotation) -> Vec<IdentityCheck> {
    let sv = skew(v);
    let sw = skew(w);
    let rm = r.matrix();
    let vw = v.dot(w);
    vec![
        IdentityCheck { name: "S(v)S(w) = wvᵀ − (vᵀw)I", lhs: sv * sw, rhs: w * v.transpose() - Mat3::identity() * vw },
        IdentityCheck { name: "S(v)S(w)S(v) = −(vᵀw)S(v)", lhs: sv * sw * sv, rhs: sv * (-vw) },
        IdentityCheck {
            name: "R S(v)S(w) Rᵀ = S(Rv)S(Rw)",
            lhs: rm * sv * sw * rm.transpose(),
            rhs: skew(&(rm * v)) * skew(&(rm * w)),
        },
        IdentityCheck { name: "S(S(v)w) = S(v)S(w) − S(w)S(v)", lhs: skew(&(sv * w)), rhs: sv * sw - sw * sv },
        IdentityCheck { name: "S(S(v)w) = wvᵀ − vwᵀ", lhs: skew(&(sv * w)), rhs: w * v.transpose() - v * w.transpose() },
        IdentityCheck { name: "S³(v) = −‖v‖²S(v)", lhs: sv * sv * sv, rhs: sv * (-v.norm_squared()) },
    ]
}

/// True iff every identity of [`skew_identities`] holds to 1e−10
/// (relative to the magnitude of the operands).
pub fn check_skew_identities(v: &Vec3, w: &Vec3, r: &Rotation) -> bool {
    identities_hold(&skew_identities(v, w, r), 1e-10)
}

pub fn identities_hold(checks: &[IdentityCheck], tol: f64) -> bool {
    checks.iter().all(|c| {
        let scale = 1.0f64.max(c.lhs.amax()).max(c.rhs.amax());
        c.residual() <= tol * scale
    })
}
