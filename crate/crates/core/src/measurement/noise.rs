use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::ImuSample;
use crate::so3::Vec3;

/// Portable, seedable generator used for every noise stream.
pub type NoiseRng = rand_chacha::ChaCha8Rng;

/// Per-sample white Gaussian noise plus a constant bias for one channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelNoise {
    pub std: f64,
    #[serde(default)]
    pub bias: [f64; 3],
}

impl ChannelNoise {
    pub const fn new(std: f64, bias: [f64; 3]) -> Self {
        ChannelNoise { std, bias }
    }

    fn perturb<R: Rng>(&self, x: &Vec3, rng: &mut R) -> Vec3 {
        // Always draw three normals so every channel consumes the stream identically.
        let n = Vec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        x + n * self.std + Vec3::from(self.bias)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default)]
    pub velocity: ChannelNoise,
    #[serde(default)]
    pub gyro: ChannelNoise,
    #[serde(default)]
    pub accel: ChannelNoise,
    #[serde(default)]
    pub mag: ChannelNoise,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    /// Noise-free sensors.
    pub fn none() -> Self {
        NoiseSpec::default()
    }

    /// Reference sensor grade: accelerometer 0.31 m/s², gyroscope 0.1 rad/s,
    /// magnetometer 0.71 with a (0.2, 0.2, 0.2) bias, velocity 0.31 m/s.
    pub fn reference(seed: u64) -> Self {
        NoiseSpec {
            velocity: ChannelNoise::new(0.31, [0.0; 3]),
            gyro: ChannelNoise::new(0.1, [0.0; 3]),
            accel: ChannelNoise::new(0.31, [0.0; 3]),
            mag: ChannelNoise::new(0.71, [0.2; 3]),
            seed,
        }
    }

    pub fn rng(&self) -> NoiseRng {
        NoiseRng::seed_from_u64(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("velocity", self.velocity), ("gyro", self.gyro), ("accel", self.accel), ("mag", self.mag)] {
            if !(c.std >= 0.0 && c.std.is_finite()) || c.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} noise must have finite std >= 0 and finite bias")));
            }
        }
        Ok(())
    }
}

/// Corrupts one sample. Draw order is velocity, gyro, accel, mag (x, y, z each).
pub fn add_noise<R: Rng>(sample: &ImuSample, spec: &NoiseSpec, rng: &mut R) -> ImuSample {
    ImuSample {
        t: sample.t,
        y_v: spec.velocity.perturb(&sample.y_v, rng),
        y_g: spec.gyro.perturb(&sample.y_g, rng),
        y_a: spec.accel.perturb(&sample.y_a, rng),
        y_m: spec.mag.perturb(&sample.y_m, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ImuSample {
        ImuSample {
            t: 0.5,
            y_v: Vec3::new(1.0, -2.0, 0.5),
            y_g: Vec3::new(0.1, 0.2, 0.3),
            y_a: Vec3::new(0.0, 0.0, 9.81),
            y_m: Vec3::new(1.0, 0.0, 1.0) / 2f64.sqrt(),
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = sample();
        let spec = NoiseSpec::none();
        assert_eq!(add_noise(&s, &spec, &mut spec.rng()), s);
    }

    #[test]
    fn magnetometer_bias_only() {
        let s = sample();
        let mut spec = NoiseSpec::none();
        spec.mag.bias = [0.2; 3];
        let y = add_noise(&s, &spec, &mut spec.rng());
        assert_eq!(y.y_m, s.y_m + Vec3::repeat(0.2));
        assert_eq!(y.y_a, s.y_a);
    }

    #[test]
    fn empirical_std_matches_reference() {
        let spec = NoiseSpec::reference(7);
        let mut rng = spec.rng();
        let zero = ImuSample { t: 0.0, y_v: Vec3::zeros(), y_g: Vec3::zeros(), y_a: Vec3::zeros(), y_m: Vec3::zeros() };
        let n = 100_000;
        let mut sums = [[0.0f64; 2]; 4];
        for _ in 0..n {
            let y = add_noise(&zero, &spec, &mut rng);
            for (acc, ch) in sums.iter_mut().zip([y.y_v.x, y.y_g.x, y.y_a.x, y.y_m.x - 0.2]) {
                acc[0] += ch;
                acc[1] += ch * ch;
            }
        }
        for (acc, want) in sums.iter().zip([0.31, 0.1, 0.31, 0.71]) {
            let mean = acc[0] / n as f64;
            let std = (acc[1] / n as f64 - mean * mean).sqrt();
            assert!((std / want - 1.0).abs() < 0.02, "{std} vs {want}");
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = NoiseSpec::reference(42);
        let (mut a, mut b) = (spec.rng(), spec.rng());
        for _ in 0..100 {
            assert_eq!(add_noise(&sample(), &spec, &mut a), add_noise(&sample(), &spec, &mut b));
        }
    }

    #[test]
    fn negative_std_rejected() {
        let mut spec = NoiseSpec::none();
        spec.gyro.std = -1.0;
        assert!(spec.validate().is_err());
    }
}
