use crate::error::{Error, Result};
use crate::measurement::TrueState;
use crate::so3::{angle_between, Rotation, UnitVec3, Vec3, COLLINEAR_EPS, E_Z, NORM_EPS};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltMetrics {
    /// `R(x₂ − x̂₂)` with `x̂₂` the normalized estimate.
    pub z2: Vec3,
    /// `∠(x₂, x̂₂)` in `[0, π]`; NaN when invalid.
    pub angle: f64,
    pub valid: bool,
}

/// Tilt error of an estimate `est` (unit or unconstrained) against the truth.
/// An unconstrained estimate too close to zero yields an invalid sample.
pub fn tilt_metrics(truth: &TrueState, est: &Vec3) -> TiltMetrics {
    let n = est.norm();
    if !(n >= NORM_EPS) {
        return TiltMetrics { z2: Vec3::repeat(f64::NAN), angle: f64::NAN, valid: false };
    }
    let u = est / n;
    let x2 = truth.tilt();
    TiltMetrics { z2: truth.r.apply(&(x2 - u)), angle: angle_between(&x2, &u), valid: true }
}

/// Unit horizontal direction of the world field `m`.
pub fn horizontal_direction(m: &UnitVec3) -> Result<UnitVec3> {
    let h = m.as_vec() - E_Z * E_Z.dot(m);
    if h.norm() < COLLINEAR_EPS {
        return Err(Error::Collinear(h.norm()));
    }
    Ok(UnitVec3::new_unchecked(h.normalize()))
}

/// Heading error seen through the horizontal field direction `m_p`:
/// `∠(Rᵀm_p, R̂ᵀm_p)`.
pub fn yaw_proxy_angle(r: &Rotation, rhat: &Rotation, m: &UnitVec3) -> Result<f64> {
    let mp = horizontal_direction(m)?;
    Ok(angle_between(&r.inverse_apply(&mp), &rhat.inverse_apply(&mp)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowMean {
    pub mean: f64,
    pub valid: usize,
    pub invalid: usize,
}

/// Mean of the non-NaN samples with `t ∈ [t0, t1]`.
pub fn mean_error_window(t: &[f64], values: &[f64], t0: f64, t1: f64) -> Result<WindowMean> {
    if !(t0 < t1) || t.len() != values.len() {
        return Err(Error::InvalidParameter(format!("bad averaging window [{t0}, {t1}]")));
    }
    let (mut sum, mut valid, mut invalid) = (0.0, 0usize, 0usize);
    for (ti, v) in t.iter().zip(values) {
        if *ti < t0 || *ti > t1 {
            continue;
        }
        if v.is_nan() {
            invalid += 1;
        } else {
            sum += v;
            valid += 1;
        }
    }
    if valid == 0 {
        return Err(Error::EmptyWindow { t0, t1 });
    }
    Ok(WindowMean { mean: sum / valid as f64, valid, invalid })
}

/// First time after which the error stays below `threshold` for at least
/// `hold` seconds; `None` if no such stretch fits in the series.
pub fn convergence_time(t: &[f64], values: &[f64], threshold: f64, hold: f64) -> Option<f64> {
    let mut start: Option<usize> = None;
    for (k, v) in values.iter().enumerate() {
        if *v < threshold {
            let s = *start.get_or_insert(k);
            if t[k] - t[s] >= hold {
                return Some(t[s]);
            }
        } else {
            start = None;
        }
    }
    None
}
