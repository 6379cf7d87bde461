//! Tilt estimators: the two-step family (first and n-th order), the one-step
//! observer, the Hua et al. baseline and a TRIAD-style unconstrained baseline.

mod martin;
mod one_step;
mod two_step;

pub use martin::{MartinGains, MartinTilt};
pub use one_step::{HuaGains, HuaObserver, OneStepGains, OneStepObserver};
pub use two_step::{TwoStepGains, TwoStepObserver, TwoStepState};

use crate::error::Result;
use crate::ode::Hold;
use crate::so3::{normalize_s2, UnitVec3, Vec3};

/// Tilt outputs of an estimator: the unconstrained intermediate estimate (if
/// the design has one) and the estimate on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltView {
    pub intermediate: Option<Vec3>,
    pub constrained: UnitVec3,
}

/// Common interface used by the comparison harness.
pub trait TiltEstimator {
    /// Advances the estimate by `dt` with measurements supplied by `hold`.
    fn step(&mut self, hold: &Hold<'_>, dt: f64);

    /// Estimated local-frame velocity.
    fn velocity(&self) -> Vec3;

    /// See [`tilt_of`].
    fn tilt(&self) -> Result<TiltView>;
}

/// Uniform accessor over every tilt estimator.
///
/// Designs without a constrained state normalize their intermediate estimate,
/// which fails when it passes near zero.
pub fn tilt_of<T: TiltEstimator + ?Sized>(obs: &T) -> Result<TiltView> {
    obs.tilt()
}

pub(crate) fn unconstrained_view(x: &Vec3) -> Result<TiltView> {
    Ok(TiltView { intermediate: Some(*x), constrained: normalize_s2(x)? })
}

/// Renormalizes a sphere state after an integration step.
pub(crate) fn renormalize(x: &Vec3) -> Vec3 {
    x / x.norm()
}
