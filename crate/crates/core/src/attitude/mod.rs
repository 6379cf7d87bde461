//! Full-attitude estimation: the complementary observer on SO(3) driven by a
//! tilt stage, a TRIAD-based unconstrained baseline, and the quaternion error
//! flow used to verify them.

mod error_flow;
mod martin;
mod observer;

pub(crate) use error_flow::rhs_principal;
pub use error_flow::{consistency_check, error_rotation, integrate_quat_error, quat_error_rhs, QuatErrorRate, QuatErrorState};
pub use martin::MartinAttitude;
pub use observer::{sigma, AttitudeGains, AttitudeObserver, TiltStage};

use crate::error::Result;
use crate::ode::Hold;
use crate::so3::Rotation;
use crate::tilt::TiltView;

/// Common interface for the comparison harness.
pub trait AttitudeEstimator {
    fn step(&mut self, hold: &Hold<'_>, dt: f64);

    /// Current attitude estimate, `None` when the estimator could not produce one.
    fn attitude(&self) -> Option<Rotation>;

    /// Tilt estimate of the underlying tilt component.
    fn tilt(&self) -> Result<TiltView>;
}
