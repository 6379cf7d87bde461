use crate::error::Result;
use crate::measurement::TrueState;
use crate::ode::Hold;
use crate::so3::{normalize_s2, triad, Rotation, UnitVec3};
use crate::tilt::{MartinGains, MartinTilt, TiltEstimator, TiltView};

use super::AttitudeEstimator;

/// Unconstrained gravity and magnetic filters, combined by TRIAD at every step.
///
/// The attitude is unavailable whenever either filtered direction is near zero
/// or the two are collinear; such samples are flagged rather than fatal.
#[derive(Clone, Debug)]
pub struct MartinAttitude {
    tilt: MartinTilt,
    m: UnitVec3,
    rhat: Option<Rotation>,
}

impl MartinAttitude {
    pub fn new(tilt: MartinTilt, m: UnitVec3) -> Self {
        let mut out = MartinAttitude { tilt, m, rhat: None };
        out.rhat = out.reconstruct().ok();
        out
    }

    pub fn at_truth(gains: MartinGains, g0: f64, truth: &TrueState, m: UnitVec3) -> Self {
        Self::new(MartinTilt::at_truth(gains, g0, truth, &m), m)
    }

    pub fn filters(&self) -> &MartinTilt {
        &self.tilt
    }

    pub fn is_valid(&self) -> bool {
        self.rhat.is_some()
    }

    fn reconstruct(&self) -> Result<Rotation> {
        let tilt = normalize_s2(&self.tilt.xhat2_prime)?;
        let mag = normalize_s2(&self.tilt.xhat3_prime)?;
        triad(&tilt, &mag, &UnitVec3::e_z(), &self.m)
    }
}

impl AttitudeEstimator for MartinAttitude {
    fn step(&mut self, hold: &Hold<'_>, dt: f64) {
        self.tilt.step(hold, dt);
        self.rhat = self.reconstruct().ok();
    }

    fn attitude(&self) -> Option<Rotation> {
        self.rhat
    }

    fn tilt(&self) -> Result<TiltView> {
        self.tilt.tilt()
    }
}
