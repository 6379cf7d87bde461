use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{exp_so3, project_so3, Rotation, Vec3, E_Z};

/// One sinusoid `amplitude · sin(2π f t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude: f64,
    pub frequency_hz: f64,
    pub phase: f64,
}

impl Wave {
    pub const fn new(amplitude: f64, frequency_hz: f64, phase: f64) -> Self {
        Wave { amplitude, frequency_hz, phase }
    }

    /// A constant signal of the given value.
    pub const fn constant(value: f64) -> Self {
        Wave { amplitude: value, frequency_hz: 0.0, phase: PI / 2.0 }
    }

    fn value(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency_hz * t + self.phase).sin()
    }

    fn derivative(&self, t: f64) -> f64 {
        let w = 2.0 * PI * self.frequency_hz;
        self.amplitude * w * (w * t + self.phase).cos()
    }
}

/// Per-axis sums of sinusoids for ω (rad/s) and v (m/s), both in the local frame.
/// Missing fields in serialized form take their [`Default`] values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectorySpec {
    pub duration: f64,
    pub dt: f64,
    pub omega_waves: [Vec<Wave>; 3],
    pub vel_waves: [Vec<Wave>; 3],
    /// Initial attitude, row-major.
    pub r0: [f64; 9],
    pub seed: u64,
}

fn identity_row_major() -> [f64; 9] {
    Rotation::identity().to_row_major()
}

impl Default for TrajectorySpec {
    /// The reference 10 s trajectory: velocities within ±2 m/s and several
    /// oscillations of every axis, sampled at 1 kHz.
    fn default() -> Self {
        TrajectorySpec {
            duration: 10.0,
            dt: 1e-3,
            omega_waves: [
                vec![Wave::new(1.2, 0.3, 0.0)],
                vec![Wave::new(0.8, 0.5, PI / 3.0)],
                vec![Wave::new(1.0, 0.7, PI / 5.0)],
            ],
            vel_waves: [
                vec![Wave::new(1.5, 0.4, PI / 4.0)],
                vec![Wave::new(1.0, 0.6, 0.0)],
                vec![Wave::new(0.5, 0.2, PI / 2.0)],
            ],
            r0: identity_row_major(),
            seed: 0,
        }
    }
}

impl TrajectorySpec {
    /// A stationary body at attitude `r0`.
    pub fn stationary(duration: f64, dt: f64, r0: Rotation) -> Self {
        TrajectorySpec {
            duration,
            dt,
            omega_waves: Default::default(),
            vel_waves: Default::default(),
            r0: r0.to_row_major(),
            seed: 0,
        }
    }

    /// Randomized two-component sinusoid sums, reproducible from `seed`.
    pub fn random(seed: u64, duration: f64, dt: f64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut waves = |amp: f64| -> [Vec<Wave>; 3] {
            std::array::from_fn(|_| {
                (0..2)
                    .map(|_| {
                        Wave::new(
                            rng.random_range(0.2..1.0) * amp,
                            rng.random_range(0.05..1.0),
                            rng.random_range(0.0..2.0 * PI),
                        )
                    })
                    .collect()
            })
        };
        let omega_waves = waves(1.0);
        let vel_waves = waves(1.2);
        let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r0 = exp_so3(&(axis * 1.5)).to_row_major();
        TrajectorySpec { duration, dt, omega_waves, vel_waves, r0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::InvalidParameter(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return Err(Error::InvalidParameter(format!("dt must lie in (0, 0.01], got {}", self.dt)));
        }
        let finite = self.omega_waves.iter().chain(&self.vel_waves).flatten().all(|w| {
            w.amplitude.is_finite() && w.frequency_hz.is_finite() && w.phase.is_finite()
        });
        if !finite {
            return Err(Error::InvalidParameter("non-finite wave parameter".into()));
        }
        Rotation::from_matrix(Rotation::from_row_major_unchecked(&self.r0).matrix().to_owned())?;
        Ok(())
    }

    /// Number of steps; the trajectory has `steps() + 1` samples.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn omega(&self, t: f64) -> Vec3 {
        eval(&self.omega_waves, t, Wave::value)
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        eval(&self.vel_waves, t, Wave::value)
    }

    pub fn velocity_rate(&self, t: f64) -> Vec3 {
        eval(&self.vel_waves, t, Wave::derivative)
    }

    pub fn initial_attitude(&self) -> Rotation {
        Rotation::from_row_major_unchecked(&self.r0)
    }
}

fn eval(waves: &[Vec<Wave>; 3], t: f64, f: fn(&Wave, f64) -> f64) -> Vec3 {
    Vec3::from_fn(|i, _| waves[i].iter().map(|w| f(w, t)).sum())
}

/// Ground truth at one instant. Vectors are in the local frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrueState {
    pub t: f64,
    pub r: Rotation,
    pub v: Vec3,
    pub omega: Vec3,
    pub vdot: Vec3,
}

impl TrueState {
    /// Tilt `Rᵀ e_z`.
    pub fn tilt(&self) -> Vec3 {
        self.r.inverse_apply(&E_Z)
    }

    /// `Rᵀ m`.
    pub fn local(&self, world: &Vec3) -> Vec3 {
        self.r.inverse_apply(world)
    }
}

/// Samples the trajectory on the uniform grid `t_k = k dt`.
///
/// ω and v are evaluated analytically; the attitude is propagated with the
/// midpoint exponential `R ← R exp(S(ω(t + dt/2)) dt)` and re-projected.
pub fn gen_trajectory(spec: &TrajectorySpec) -> Result<Vec<TrueState>> {
    spec.validate()?;
    let n = spec.steps();
    let mut out = Vec::with_capacity(n + 1);
    let mut r = spec.initial_attitude();
    for k in 0..=n {
        let t = k as f64 * spec.dt;
        if k > 0 {
            let t_mid = (k as f64 - 0.5) * spec.dt;
            let step = exp_so3(&(spec.omega(t_mid) * spec.dt));
            r = project_so3(r.compose(&step).matrix())?;
        }
        out.push(TrueState { t, r, v: spec.velocity(t), omega: spec.omega(t), vdot: spec.velocity_rate(t) });
    }
    Ok(out)
}
