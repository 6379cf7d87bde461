//! Fixed-step RK4 with held measurements.

use crate::measurement::ImuSample;

/// A state that can be advanced by explicit Runge–Kutta stages.
pub trait OdeState: Clone {
    /// `self + h · rate`
    fn add_scaled(&self, rate: &Self, h: f64) -> Self;
}

/// How measurements are held across one integration step.
#[derive(Clone, Copy, Debug)]
pub enum Hold<'a> {
    /// The sample is constant over the step.
    Zero(&'a ImuSample),
    /// Linear interpolation from the sample at the start of the step to the one at its end.
    Linear(&'a ImuSample, &'a ImuSample),
}

impl Hold<'_> {
    /// Measurement at fraction `frac ∈ [0, 1]` of the step.
    pub fn at(&self, frac: f64) -> ImuSample {
        match *self {
            Hold::Zero(y) => *y,
            Hold::Linear(a, b) => {
                if frac == 0.0 {
                    *a
                } else if frac == 1.0 {
                    *b
                } else {
                    a.lerp(b, frac)
                }
            }
        }
    }
}

/// One classical RK4 step of `ẋ = f(x, y)` with `y` sampled from `hold`.
pub fn rk4<S, F>(x: &S, hold: &Hold<'_>, dt: f64, mut f: F) -> S
where
    S: OdeState,
    F: FnMut(&S, &ImuSample) -> S,
{
    let y0 = hold.at(0.0);
    let ym = hold.at(0.5);
    let y1 = hold.at(1.0);
    let k1 = f(x, &y0);
    let k2 = f(&x.add_scaled(&k1, 0.5 * dt), &ym);
    let k3 = f(&x.add_scaled(&k2, 0.5 * dt), &ym);
    let k4 = f(&x.add_scaled(&k3, dt), &y1);
    x.add_scaled(&k1, dt / 6.0).add_scaled(&k2, dt / 3.0).add_scaled(&k3, dt / 3.0).add_scaled(&k4, dt / 6.0)
}

/// RK4 for autonomous systems (error flows), no measurement input.
pub fn rk4_autonomous<S, F>(x: &S, dt: f64, mut f: F) -> S
where
    S: OdeState,
    F: FnMut(&S) -> S,
{
    let k1 = f(x);
    let k2 = f(&x.add_scaled(&k1, 0.5 * dt));
    let k3 = f(&x.add_scaled(&k2, 0.5 * dt));
    let k4 = f(&x.add_scaled(&k3, dt));
    x.add_scaled(&k1, dt / 6.0).add_scaled(&k2, dt / 3.0).add_scaled(&k3, dt / 3.0).add_scaled(&k4, dt / 6.0)
}

impl OdeState for crate::so3::Vec3 {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        self + rate * h
    }
}

impl OdeState for f64 {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        self + rate * h
    }
}

impl<A: OdeState, B: OdeState> OdeState for (A, B) {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        (self.0.add_scaled(&rate.0, h), self.1.add_scaled(&rate.1, h))
    }
}

impl<A: OdeState, B: OdeState, C: OdeState> OdeState for (A, B, C) {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        (self.0.add_scaled(&rate.0, h), self.1.add_scaled(&rate.1, h), self.2.add_scaled(&rate.2, h))
    }
}

impl<A: OdeState> OdeState for Vec<A> {
    fn add_scaled(&self, rate: &Self, h: f64) -> Self {
        self.iter().zip(rate).map(|(x, r)| x.add_scaled(r, h)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_exponential_decay_is_fourth_order() {
        let exact = (-1.0f64).exp();
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut x = 1.0;
            for _ in 0..n {
                x = rk4_autonomous(&x, dt, |x| -x);
            }
            (x - exact).abs()
        };
        let ratio = err(10) / err(20);
        assert!((ratio - 16.0).abs() < 1.5, "{ratio}");
    }
}
