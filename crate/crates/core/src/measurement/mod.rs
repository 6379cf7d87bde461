//! Ground-truth trajectories, ideal and noisy sensor synthesis, and run records.

mod imu;
mod noise;
mod record;
mod trajectory;

pub use imu::{synth_measurements, ImuSample};
pub use noise::{add_noise, ChannelNoise, NoiseRng, NoiseSpec};
pub use record::{RunRecord, BASE_COLUMNS};
pub use trajectory::{gen_trajectory, TrajectorySpec, TrueState, Wave};

/// Standard gravity used when a scenario does not override it (m/s²).
pub const DEFAULT_G0: f64 = 9.81;
