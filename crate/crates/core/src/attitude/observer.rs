use crate::error::{Error, Result};
use crate::measurement::{ImuSample, TrueState};
use crate::ode::{rk4, Hold, OdeState};
use crate::so3::{exp_so3, right_jacobian_inv, skew, Mat3, Rotation, UnitVec3, Vec3, E_Z};
use crate::tilt::{HuaObserver, TiltEstimator, TiltView, TwoStepObserver, TwoStepState};

use super::AttitudeEstimator;

/// `(ρ₁, ρ₂, μ)`: tilt reference gain, magnetometer gain, and yaw-only
/// magnetometer gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeGains {
    pub rho1: f64,
    pub rho2: f64,
    pub mu: f64,
}

impl AttitudeGains {
    pub fn new(rho1: f64, rho2: f64, mu: f64) -> Result<Self> {
        if !(rho1 > 0.0 && rho1.is_finite()) {
            return Err(Error::GainCondition(format!("ρ₁ must be positive, got {rho1}")));
        }
        if !(rho2 >= 0.0 && rho2.is_finite() && mu >= 0.0 && mu.is_finite()) {
            return Err(Error::GainCondition(format!("ρ₂ and μ must be non-negative, got ({rho2}, {mu})")));
        }
        Ok(AttitudeGains { rho1, rho2, mu })
    }

    /// Magnetometer acts on yaw only (`ρ₂ = 0`).
    pub fn hierarchic(rho1: f64, mu: f64) -> Result<Self> {
        Self::new(rho1, 0.0, mu)
    }

    /// Symmetric two-vector correction (`μ = 0`).
    pub fn invariant(rho1: f64, rho2: f64) -> Result<Self> {
        Self::new(rho1, rho2, 0.0)
    }
}

/// Correction term `σ = ρ₁S(R̂ᵀe_z)x̂₂′ + ρ₂S(R̂ᵀm)y_m + μ R̂ᵀe_z (R̂ᵀe_z)ᵀ S(R̂ᵀm) y_m`.
pub fn sigma(g: &AttitudeGains, rhat: &Rotation, reference: &Vec3, y_m: &Vec3, m: &Vec3) -> Vec3 {
    let u = rhat.inverse_apply(&E_Z);
    let sm = skew(&rhat.inverse_apply(m)) * y_m;
    skew(&u) * reference * g.rho1 + sm * g.rho2 + u * (u.dot(&sm) * g.mu)
}

/// Tilt component feeding the attitude observer.
#[derive(Clone, Debug)]
pub enum TiltStage {
    /// Two-step estimator; its intermediate `x̂₂′` is the tilt reference.
    TwoStep(TwoStepObserver),
    /// Hua et al. estimator; its constrained `x̂₂` is the tilt reference.
    Hua(HuaObserver),
}

#[derive(Clone, Debug)]
enum StageState {
    TwoStep(TwoStepState),
    Hua((Vec3, Vec3)),
}

impl OdeState for StageState {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        match (self, rate) {
            (StageState::TwoStep(x), StageState::TwoStep(r)) => StageState::TwoStep(x.add_scaled(r, h)),
            (StageState::Hua(x), StageState::Hua(r)) => StageState::Hua(x.add_scaled(r, h)),
            _ => unreachable!("stage kinds never mix"),
        }
    }
}

impl TiltStage {
    fn state(&self) -> StageState {
        match self {
            TiltStage::TwoStep(o) => StageState::TwoStep(o.state().clone()),
            TiltStage::Hua(o) => StageState::Hua((o.xhat1, o.xhat2)),
        }
    }

    fn rate(&self, x: &StageState, y: &ImuSample) -> StageState {
        match (self, x) {
            (TiltStage::TwoStep(o), StageState::TwoStep(s)) => StageState::TwoStep(o.rate(s, y)),
            (TiltStage::Hua(o), StageState::Hua(s)) => StageState::Hua(o.rate(s, y)),
            _ => unreachable!("stage kinds never mix"),
        }
    }

    fn reference(&self, x: &StageState, y: &ImuSample) -> Vec3 {
        match (self, x) {
            (TiltStage::TwoStep(o), StageState::TwoStep(s)) => o.intermediate(s, y),
            (TiltStage::Hua(_), StageState::Hua((_, x2))) => *x2,
            _ => unreachable!("stage kinds never mix"),
        }
    }

    fn commit(&mut self, x: StageState, y_end: &ImuSample) {
        match (self, x) {
            (TiltStage::TwoStep(o), StageState::TwoStep(s)) => {
                let s = o.finish(s, y_end);
                o.set_state(s);
            }
            (TiltStage::Hua(o), StageState::Hua((x1, x2))) => {
                o.xhat1 = x1;
                o.xhat2 = x2 / x2.norm();
            }
            _ => unreachable!("stage kinds never mix"),
        }
    }

    pub fn tilt(&self) -> Result<TiltView> {
        match self {
            TiltStage::TwoStep(o) => o.tilt(),
            TiltStage::Hua(o) => o.tilt(),
        }
    }
}

/// Complementary attitude observer `Ṙ̂ = R̂ S(y_g − σ)`.
#[derive(Clone, Debug)]
pub struct AttitudeObserver {
    gains: AttitudeGains,
    m: UnitVec3,
    stage: TiltStage,
    rhat: Rotation,
}

impl AttitudeObserver {
    pub fn new(gains: AttitudeGains, m: UnitVec3, stage: TiltStage, rhat: Rotation) -> Self {
        AttitudeObserver { gains, m, stage, rhat }
    }

    /// Attitude and a two-step tilt stage both at the true state.
    pub fn at_truth(gains: AttitudeGains, m: UnitVec3, stage: crate::tilt::TwoStepGains, g0: f64, truth: &TrueState) -> Self {
        let stage = TiltStage::TwoStep(TwoStepObserver::at_truth(stage, g0, truth));
        Self::new(gains, m, stage, truth.r)
    }

    pub fn gains(&self) -> AttitudeGains {
        self.gains
    }

    pub fn rhat(&self) -> Rotation {
        self.rhat
    }

    pub fn stage(&self) -> &TiltStage {
        &self.stage
    }

    /// Correction `σ` at the current state for measurement `y`.
    pub fn current_sigma(&self, y: &ImuSample) -> Vec3 {
        let s = self.stage.state();
        sigma(&self.gains, &self.rhat, &self.stage.reference(&s, y), &y.y_m, &self.m)
    }
}

/// Joint state of one step: tilt stage, body increment `θ` and world yaw `ψ`,
/// with `R̂ = Rz(ψ) R̂₀ exp(S(θ))`.
type StepState = (StageState, Vec3, f64);

impl AttitudeEstimator for AttitudeObserver {
    /// One RK4 step of the tilt stage and attitude together.
    ///
    /// The yaw-only `μ` correction is a rotation about `e_z` in the world frame
    /// and is integrated as the angle `ψ`; everything else acts on the body
    /// increment `θ`. `R̂ᵀe_z` therefore never depends on `ψ`, and with `ρ₂ = 0`
    /// the tilt of `R̂` is bit-for-bit independent of the magnetometer.
    fn step(&mut self, hold: &Hold<'_>, dt: f64) {
        let g = self.gains;
        let r0 = *self.rhat.matrix();
        let u0: Vec3 = r0.row(2).transpose();
        let m = *self.m.as_vec();
        let rate = |(stage, theta, psi): &StepState, y: &ImuSample| -> StepState {
            let e = exp_so3(theta);
            let u = e.inverse_apply(&u0);
            let world_m = Rotation::about_z(*psi).inverse_apply(&m);
            let local_m = e.inverse_apply(&(r0.transpose() * world_m));
            let sm = skew(&local_m) * y.y_m;
            let sigma_b = skew(&u) * self.stage.reference(stage, y) * g.rho1 + sm * g.rho2;
            let yaw_rate = -g.mu * u.dot(&sm);
            (self.stage.rate(stage, y), right_jacobian_inv(theta) * (y.y_g - sigma_b), yaw_rate)
        };
        let x0: StepState = (self.stage.state(), Vec3::zeros(), 0.0);
        let (stage, theta, psi) = rk4(&x0, hold, dt, rate);
        self.stage.commit(stage, &hold.at(1.0));
        let body = r0 * exp_so3(&theta).matrix();
        let next = if psi == 0.0 { body } else { Rotation::about_z(psi).matrix() * body };
        self.rhat = reorthonormalize_keep_tilt(next);
    }

    fn attitude(&self) -> Option<Rotation> {
        Some(self.rhat)
    }

    fn tilt(&self) -> Result<TiltView> {
        self.stage.tilt()
    }
}

/// Gram–Schmidt starting from the third row (`R̂ᵀe_z`) when the drift exceeds
/// 1e−12, so the tilt row only ever depends on itself.
fn reorthonormalize_keep_tilt(m: Mat3) -> Rotation {
    let r = Rotation::from_matrix_unchecked(m);
    if r.orthonormality_error() <= 1e-12 {
        return r;
    }
    let r3: Vec3 = m.row(2).transpose().normalize();
    let r1: Vec3 = m.row(0).transpose();
    let r1 = (r1 - r3 * r3.dot(&r1)).normalize();
    let r2 = r3.cross(&r1);
    Rotation::from_matrix_unchecked(Mat3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]))
}
