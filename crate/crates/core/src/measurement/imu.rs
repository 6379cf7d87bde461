use crate::measurement::TrueState;
use crate::so3::{skew, UnitVec3, Vec3};

/// One synchronous set of measurements, all in the local frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// Velocity (m/s).
    pub y_v: Vec3,
    /// Angular velocity (rad/s).
    pub y_g: Vec3,
    /// Specific acceleration including gravity (m/s²).
    pub y_a: Vec3,
    /// Magnetic direction (unit before noise).
    pub y_m: Vec3,
}

impl ImuSample {
    pub(crate) fn lerp(&self, other: &ImuSample, frac: f64) -> ImuSample {
        let mix = |a: &Vec3, b: &Vec3| a + (b - a) * frac;
        ImuSample {
            t: self.t + (other.t - self.t) * frac,
            y_v: mix(&self.y_v, &other.y_v),
            y_g: mix(&self.y_g, &other.y_g),
            y_a: mix(&self.y_a, &other.y_a),
            y_m: mix(&self.y_m, &other.y_m),
        }
    }
}

/// Ideal sensor outputs: `y_v = v`, `y_g = ω`, `y_a = S(ω)v + v̇ + g₀Rᵀe_z`, `y_m = Rᵀm`.
pub fn synth_measurements(s: &TrueState, m: &UnitVec3, g0: f64) -> ImuSample {
    ImuSample {
        t: s.t,
        y_v: s.v,
        y_g: s.omega,
        y_a: skew(&s.omega) * s.v + s.vdot + s.tilt() * g0,
        y_m: s.r.inverse_apply(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::Rotation;

    fn field() -> UnitVec3 {
        UnitVec3::new_unchecked(Vec3::new(1.0, 0.0, 1.0) / 2f64.sqrt())
    }

    #[test]
    fn rest_case() {
        let s = TrueState { t: 0.0, r: Rotation::identity(), v: Vec3::zeros(), omega: Vec3::zeros(), vdot: Vec3::zeros() };
        let y = synth_measurements(&s, &field(), 9.81);
        assert_eq!(y.y_a, Vec3::new(0.0, 0.0, 9.81));
        assert_eq!(y.y_v, Vec3::zeros());
        assert_eq!(y.y_g, Vec3::zeros());
        assert_eq!(y.y_m, *field());
    }

    #[test]
    fn centripetal_term() {
        let s = TrueState { t: 0.0, r: Rotation::identity(), v: Vec3::x(), omega: Vec3::z(), vdot: Vec3::zeros() };
        let y = synth_measurements(&s, &field(), 9.81);
        assert_eq!(y.y_a, Vec3::new(0.0, 1.0, 9.81));
    }

    #[test]
    fn magnetometer_is_unit_before_noise() {
        let r = crate::so3::exp_so3(&Vec3::new(0.3, 1.2, -0.7));
        let s = TrueState { t: 0.0, r, v: Vec3::zeros(), omega: Vec3::zeros(), vdot: Vec3::zeros() };
        assert!((synth_measurements(&s, &field(), 9.81).y_m.norm() - 1.0).abs() < 1e-15);
    }
}
