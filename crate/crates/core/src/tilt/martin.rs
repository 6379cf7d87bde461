use crate::error::{Error, Result};
use crate::measurement::{ImuSample, TrueState, DEFAULT_G0};
use crate::ode::{rk4, Hold};
use crate::so3::{skew, UnitVec3, Vec3};

use super::{unconstrained_view, TiltEstimator, TiltView};

/// Gains of the unconstrained baseline: a second-order gravity chain with
/// `α₁ = L K`, `α₂ = L + K`, and a first-order magnetic filter with rate `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartinGains {
    pub l: f64,
    pub k: f64,
    pub m: f64,
}

impl MartinGains {
    pub fn new(l: f64, k: f64, m: f64) -> Result<Self> {
        if [l, k, m].iter().all(|g| *g > 0.0 && g.is_finite()) {
            Ok(MartinGains { l, k, m })
        } else {
            Err(Error::GainCondition(format!("L, K, M must be positive, got ({l}, {k}, {m})")))
        }
    }

    /// `L = K = α/2` with `α = 2√(γ g₀)`, and `M = μ`.
    pub fn from_reference(gamma: f64, mu: f64, g0: f64) -> Result<Self> {
        let half = (gamma * g0).sqrt();
        Self::new(half, half, mu)
    }

    pub fn alphas(&self) -> [f64; 2] {
        [self.l * self.k, self.l + self.k]
    }
}

impl Default for MartinGains {
    fn default() -> Self {
        Self::from_reference(20.0, 20.0, DEFAULT_G0).expect("positive gains")
    }
}

/// Unconstrained estimates of `x₂ = Rᵀe_z` and `x₃ = Rᵀm`.
#[derive(Clone, Debug)]
pub struct MartinTilt {
    gains: MartinGains,
    g0: f64,
    pub xhat1: Vec3,
    pub xhat2_prime: Vec3,
    pub xhat3_prime: Vec3,
}

type State = (Vec3, Vec3, Vec3);

impl MartinTilt {
    pub fn new(gains: MartinGains, g0: f64, xhat1: Vec3, xhat2_prime: Vec3, xhat3_prime: Vec3) -> Self {
        MartinTilt { gains, g0, xhat1, xhat2_prime, xhat3_prime }
    }

    pub fn at_truth(gains: MartinGains, g0: f64, truth: &TrueState, m: &UnitVec3) -> Self {
        Self::new(gains, g0, truth.v, truth.tilt(), truth.local(m))
    }

    pub fn gains(&self) -> MartinGains {
        self.gains
    }

    fn rate(&self, (x1, x2p, x3p): &State, y: &ImuSample) -> State {
        let [a1, a2] = self.gains.alphas();
        let sg = skew(&y.y_g);
        let p2 = y.y_v - x1;
        let d1 = -sg * x1 + y.y_a + p2 * a2 - x2p * self.g0;
        let d2 = -sg * x2p - p2 * (a1 / self.g0);
        let d3 = -sg * x3p - (x3p - y.y_m) * self.gains.m;
        (d1, d2, d3)
    }

    /// Normalized magnetic-direction estimate.
    pub fn mag_direction(&self) -> Result<UnitVec3> {
        crate::so3::normalize_s2(&self.xhat3_prime)
    }
}

impl TiltEstimator for MartinTilt {
    fn step(&mut self, hold: &Hold<'_>, dt: f64) {
        let x = (self.xhat1, self.xhat2_prime, self.xhat3_prime);
        (self.xhat1, self.xhat2_prime, self.xhat3_prime) = rk4(&x, hold, dt, |x, y| self.rate(x, y));
    }

    fn velocity(&self) -> Vec3 {
        self.xhat1
    }

    fn tilt(&self) -> Result<TiltView> {
        unconstrained_view(&self.xhat2_prime)
    }
}
