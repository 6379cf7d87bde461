use crate::companion::{binomial_gains, companion};
use crate::error::{Error, Result};
use crate::measurement::{ImuSample, TrueState};
use crate::ode::{rk4, Hold, OdeState};
use crate::so3::{skew, UnitVec3, Vec3, E_Z};

use super::{renormalize, TiltEstimator, TiltView};

#[derive(Clone, Debug, PartialEq)]
pub struct TwoStepGains {
    alphas: Vec<f64>,
    gamma: f64,
}

impl TwoStepGains {
    /// `alphas = (α₁, …, α_n)`; the chain polynomial must be Hurwitz and `γ > 0`.
    pub fn new(alphas: Vec<f64>, gamma: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidParameter("at least one gain α₁ is required".into()));
        }
        if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::GainCondition(format!("all α_i must be positive, got {alphas:?}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::GainCondition(format!("γ must be positive, got {gamma}")));
        }
        if alphas.len() > 1 {
            companion(&alphas)?;
        }
        Ok(TwoStepGains { alphas, gamma })
    }

    /// All chain poles at `−ω₀` with `ω₀ = 2√(γ g₀)`.
    pub fn binomial(order: usize, gamma: f64, g0: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        TwoStepGains::new(binomial_gains(order, 2.0 * (gamma * g0).sqrt()), gamma)
    }

    /// Second-order chain with a critically damped double pole at `−√(γ g₀)`:
    /// `α₁ = γ g₀`, `α₂ = 2√(γ g₀)`.
    pub fn critically_damped(gamma: f64, g0: f64) -> Result<Self> {
        TwoStepGains::new(binomial_gains(2, (gamma * g0).sqrt()), gamma)
    }

    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Estimator state. For order 1 `xhat2_prime` is the algebraic value
/// `−(α₁/g₀)(y_v − x̂₁)` at the latest sample; for higher orders it is integrated.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStepState {
    pub xhat1: Vec3,
    /// Internal chain states `p₂ … p_{n−1}`.
    pub p: Vec<Vec3>,
    pub xhat2_prime: Vec3,
    pub xhat2: Vec3,
}

impl OdeState for TwoStepState {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        TwoStepState {
            xhat1: self.xhat1 + rate.xhat1 * h,
            p: self.p.add_scaled(&rate.p, h),
            xhat2_prime: self.xhat2_prime + rate.xhat2_prime * h,
            xhat2: self.xhat2 + rate.xhat2 * h,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwoStepObserver {
    gains: TwoStepGains,
    g0: f64,
    state: TwoStepState,
}

impl TwoStepObserver {
    /// Starts from velocity measurement `y_v0`, intermediate tilt `xhat2_prime`
    /// and constrained tilt `xhat2`, with a zero internal chain.
    ///
    /// For order 1, `x̂₁` is placed so that the algebraic intermediate equals
    /// `xhat2_prime`; for higher orders `x̂₁ = y_v0`.
    pub fn new(gains: TwoStepGains, g0: f64, y_v0: Vec3, xhat2_prime: Vec3, xhat2: UnitVec3) -> Self {
        let n = gains.order();
        let xhat1 = if n == 1 { y_v0 + xhat2_prime * (g0 / gains.alphas[0]) } else { y_v0 };
        let p = vec![Vec3::zeros(); n.saturating_sub(2)];
        TwoStepObserver { gains, g0, state: TwoStepState { xhat1, p, xhat2_prime, xhat2: xhat2.into_inner() } }
    }

    /// Zero estimation error with respect to `truth`.
    pub fn at_truth(gains: TwoStepGains, g0: f64, truth: &TrueState) -> Self {
        let x2 = truth.tilt();
        Self::new(gains, g0, truth.v, x2, UnitVec3::new_unchecked(x2))
    }

    pub fn from_state(gains: TwoStepGains, g0: f64, state: TwoStepState) -> Result<Self> {
        if state.p.len() != gains.order().saturating_sub(2) {
            return Err(Error::InvalidParameter(format!(
                "order {} needs {} internal chain states, got {}",
                gains.order(),
                gains.order().saturating_sub(2),
                state.p.len()
            )));
        }
        Ok(TwoStepObserver { gains, g0, state })
    }

    pub fn state(&self) -> &TwoStepState {
        &self.state
    }

    pub fn gains(&self) -> &TwoStepGains {
        &self.gains
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    /// Pure form of [`TiltEstimator::step`].
    pub fn stepped(&self, hold: &Hold<'_>, dt: f64) -> TwoStepState {
        let next = rk4(&self.state, hold, dt, |x, y| self.rate(x, y));
        self.finish(next, &hold.at(1.0))
    }

    /// Renormalizes `x̂₂` and, for order 1, refreshes the algebraic intermediate.
    pub(crate) fn finish(&self, mut next: TwoStepState, y_end: &ImuSample) -> TwoStepState {
        next.xhat2 = renormalize(&next.xhat2);
        if self.gains.order() == 1 {
            next.xhat2_prime = self.algebraic_prime(&next.xhat1, y_end);
        }
        next
    }

    /// Intermediate tilt `x̂₂′` at an arbitrary (stage) state.
    pub(crate) fn intermediate(&self, x: &TwoStepState, y: &ImuSample) -> Vec3 {
        if self.gains.order() == 1 {
            self.algebraic_prime(&x.xhat1, y)
        } else {
            x.xhat2_prime
        }
    }

    pub(crate) fn set_state(&mut self, state: TwoStepState) {
        self.state = state;
    }

    fn algebraic_prime(&self, xhat1: &Vec3, y: &ImuSample) -> Vec3 {
        (y.y_v - xhat1) * (-self.gains.alphas[0] / self.g0)
    }

    pub(crate) fn rate(&self, x: &TwoStepState, y: &ImuSample) -> TwoStepState {
        let a = &self.gains.alphas;
        let n = a.len();
        let sg = skew(&y.y_g);
        let p_n = y.y_v - x.xhat1;
        let (x2p, x2p_rate) = if n == 1 {
            (self.algebraic_prime(&x.xhat1, y), Vec3::zeros())
        } else {
            let p2 = x.p.first().copied().unwrap_or(p_n);
            (x.xhat2_prime, -sg * x.xhat2_prime - p2 * (a[0] / self.g0))
        };
        // p_i for i = 2..n, with p_n = y_v − x̂₁.
        let p_at = |i: usize| if i == n { p_n } else { x.p[i - 2] };
        let p_rate = (2..n).map(|i| -sg * p_at(i) + p_at(i + 1)).collect();
        let chain: Vec3 = (2..=n).map(|i| p_at(i) * a[i - 1]).sum();
        let xhat1 = -sg * x.xhat1 + y.y_a + chain - x2p * self.g0;
        let corr = skew(&x.xhat2) * x2p * self.gains.gamma;
        let xhat2 = -skew(&(y.y_g - corr)) * x.xhat2;
        TwoStepState { xhat1, p: p_rate, xhat2_prime: x2p_rate, xhat2 }
    }

    /// Error coordinates `(z_p₁ … z_pₙ, z₂)` expressed in the world frame.
    pub fn error_coords(&self, truth: &TrueState) -> (Vec<Vec3>, Vec3) {
        let r = &truth.r;
        let n = self.gains.order();
        let k = self.gains.alphas[0] / self.g0;
        let mut zp = vec![r.apply(&(truth.tilt() - self.state.xhat2_prime))];
        if n >= 2 {
            zp.extend(self.state.p.iter().map(|p| r.apply(p) * k));
            zp.push(r.apply(&(truth.v - self.state.xhat1)) * k);
        }
        (zp, E_Z - r.apply(&self.state.xhat2))
    }
}

impl TiltEstimator for TwoStepObserver {
    fn step(&mut self, hold: &Hold<'_>, dt: f64) {
        self.state = self.stepped(hold, dt);
    }

    fn velocity(&self) -> Vec3 {
        self.state.xhat1
    }

    fn tilt(&self) -> Result<TiltView> {
        Ok(TiltView {
            intermediate: Some(self.state.xhat2_prime),
            constrained: UnitVec3::new_unchecked(self.state.xhat2),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_validation() {
        assert!(TwoStepGains::new(vec![], 1.0).is_err());
        assert!(TwoStepGains::new(vec![1.0], 0.0).is_err());
        assert!(TwoStepGains::new(vec![-1.0], 1.0).is_err());
        assert!(TwoStepGains::new(vec![1.0, 1.0, 0.5], 1.0).is_err());
        let g = TwoStepGains::binomial(3, 20.0, 9.81).unwrap();
        let w = 2.0 * (196.2f64).sqrt();
        assert!((g.alphas()[0] - w.powi(3)).abs() < 1e-9);
        assert!((g.alphas()[2] - 3.0 * w).abs() < 1e-12);
        let c = TwoStepGains::critically_damped(20.0, 9.81).unwrap();
        assert!((c.alphas()[0] - 196.2).abs() < 1e-9);
        assert!((c.alphas()[1] - 28.0143).abs() < 1e-4);
    }

    #[test]
    fn first_order_places_intermediate() {
        let g = TwoStepGains::new(vec![2.0], 1.0).unwrap();
        let yv = Vec3::new(0.3, -0.1, 0.2);
        let target = Vec3::new(0.1, 0.2, 0.9);
        let obs = TwoStepObserver::new(g, 9.81, yv, target, UnitVec3::e_z());
        let y = ImuSample { t: 0.0, y_v: yv, y_g: Vec3::zeros(), y_a: Vec3::zeros(), y_m: Vec3::zeros() };
        assert!((obs.algebraic_prime(&obs.state.xhat1, &y) - target).amax() < 1e-15);
    }

    #[test]
    fn state_shape_checked() {
        let g = TwoStepGains::binomial(3, 20.0, 9.81).unwrap();
        let st = TwoStepState { xhat1: Vec3::zeros(), p: vec![], xhat2_prime: Vec3::zeros(), xhat2: E_Z };
        assert!(TwoStepObserver::from_state(g, 9.81, st).is_err());
    }
}
