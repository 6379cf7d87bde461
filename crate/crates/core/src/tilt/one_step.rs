use crate::error::{Error, Result};
use crate::measurement::{ImuSample, TrueState};
use crate::ode::{rk4, Hold};
use crate::so3::{skew, UnitVec3, Vec3, E_Z};

use super::{renormalize, TiltEstimator, TiltView};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::GainCondition(format!("{name} must be positive, got {x}")))
    }
}

/// Gains `(α, γ)` of the one-step observer; requires `γ g₀ ≤ α²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneStepGains {
    alpha: f64,
    gamma: f64,
}

impl OneStepGains {
    pub fn new(alpha: f64, gamma: f64, g0: f64) -> Result<Self> {
        positive("α", alpha)?;
        positive("γ", gamma)?;
        if gamma * g0 > alpha * alpha {
            return Err(Error::GainCondition(format!("γg₀ = {} exceeds α² = {}", gamma * g0, alpha * alpha)));
        }
        Ok(OneStepGains { alpha, gamma })
    }

    /// `α = 2√(γ g₀)`.
    pub fn critically_damped(gamma: f64, g0: f64) -> Result<Self> {
        Self::new(2.0 * (gamma * g0).sqrt(), gamma, g0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

#[derive(Clone, Debug)]
pub struct OneStepObserver {
    gains: OneStepGains,
    g0: f64,
    pub xhat1: Vec3,
    pub xhat2: Vec3,
}

impl OneStepObserver {
    pub fn new(gains: OneStepGains, g0: f64, xhat1: Vec3, xhat2: UnitVec3) -> Self {
        OneStepObserver { gains, g0, xhat1, xhat2: xhat2.into_inner() }
    }

    pub fn at_truth(gains: OneStepGains, g0: f64, truth: &TrueState) -> Self {
        Self::new(gains, g0, truth.v, UnitVec3::new_unchecked(truth.tilt()))
    }

    pub fn gains(&self) -> OneStepGains {
        self.gains
    }

    fn rate(&self, (x1, x2): &(Vec3, Vec3), y: &ImuSample) -> (Vec3, Vec3) {
        let e1 = y.y_v - x1;
        let d1 = -skew(&y.y_g) * x1 - x2 * self.g0 + y.y_a + e1 * self.gains.alpha;
        let d2 = -skew(&(y.y_g + skew(x2) * e1 * self.gains.gamma)) * x2;
        (d1, d2)
    }

    /// `(z₁, z₂) = (R(x₁ − x̂₁), R(x₂ − x̂₂))`.
    pub fn error_coords(&self, truth: &TrueState) -> (Vec3, Vec3) {
        (truth.r.apply(&(truth.v - self.xhat1)), E_Z - truth.r.apply(&self.xhat2))
    }
}

impl TiltEstimator for OneStepObserver {
    fn step(&mut self, hold: &Hold<'_>, dt: f64) {
        let (x1, x2) = rk4(&(self.xhat1, self.xhat2), hold, dt, |x, y| self.rate(x, y));
        self.xhat1 = x1;
        self.xhat2 = renormalize(&x2);
    }

    fn velocity(&self) -> Vec3 {
        self.xhat1
    }

    fn tilt(&self) -> Result<TiltView> {
        Ok(TiltView { intermediate: None, constrained: UnitVec3::new_unchecked(self.xhat2) })
    }
}

/// Gains `(k₁ᵛ, k₂ᵛ, k₁ʳ)` of the Hua et al. observer.
///
/// Requires `k₁ʳ g₀ ≤ k₁ᵛ k₂ᵛ`; with `k₂ᵛ = 0` the observer reduces to the
/// one-step design and the one-step condition `k₁ʳ g₀ ≤ (k₁ᵛ)²` is used instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HuaGains {
    k1v: f64,
    k2v: f64,
    k1r: f64,
}

impl HuaGains {
    pub fn new(k1v: f64, k2v: f64, k1r: f64, g0: f64) -> Result<Self> {
        positive("k₁ᵛ", k1v)?;
        positive("k₁ʳ", k1r)?;
        if k2v == 0.0 {
            OneStepGains::new(k1v, k1r, g0)?;
        } else {
            positive("k₂ᵛ", k2v)?;
            if k1r * g0 > k1v * k2v {
                return Err(Error::GainCondition(format!("k₁ʳg₀ = {} exceeds k₁ᵛk₂ᵛ = {}", k1r * g0, k1v * k2v)));
            }
        }
        Ok(HuaGains { k1v, k2v, k1r })
    }

    pub fn k1v(&self) -> f64 {
        self.k1v
    }

    pub fn k2v(&self) -> f64 {
        self.k2v
    }

    pub fn k1r(&self) -> f64 {
        self.k1r
    }
}

#[derive(Clone, Debug)]
pub struct HuaObserver {
    gains: HuaGains,
    g0: f64,
    pub xhat1: Vec3,
    pub xhat2: Vec3,
}

impl HuaObserver {
    pub fn new(gains: HuaGains, g0: f64, xhat1: Vec3, xhat2: UnitVec3) -> Self {
        HuaObserver { gains, g0, xhat1, xhat2: xhat2.into_inner() }
    }

    pub fn at_truth(gains: HuaGains, g0: f64, truth: &TrueState) -> Self {
        Self::new(gains, g0, truth.v, UnitVec3::new_unchecked(truth.tilt()))
    }

    pub fn gains(&self) -> HuaGains {
        self.gains
    }

    pub(crate) fn rate(&self, (x1, x2): &(Vec3, Vec3), y: &ImuSample) -> (Vec3, Vec3) {
        let g = &self.gains;
        let e1 = y.y_v - x1;
        let s2 = skew(x2);
        let d1 = -skew(&y.y_g) * x1 - x2 * self.g0 + y.y_a + e1 * g.k1v - s2 * (s2 * e1) * g.k2v;
        let d2 = -skew(&(y.y_g + s2 * e1 * g.k1r)) * x2;
        (d1, d2)
    }

    pub fn error_coords(&self, truth: &TrueState) -> (Vec3, Vec3) {
        (truth.r.apply(&(truth.v - self.xhat1)), E_Z - truth.r.apply(&self.xhat2))
    }
}

impl TiltEstimator for HuaObserver {
    fn step(&mut self, hold: &Hold<'_>, dt: f64) {
        let (x1, x2) = rk4(&(self.xhat1, self.xhat2), hold, dt, |x, y| self.rate(x, y));
        self.xhat1 = x1;
        self.xhat2 = renormalize(&x2);
    }

    fn velocity(&self) -> Vec3 {
        self.xhat1
    }

    fn tilt(&self) -> Result<TiltView> {
        Ok(TiltView { intermediate: None, constrained: UnitVec3::new_unchecked(self.xhat2) })
    }
}
