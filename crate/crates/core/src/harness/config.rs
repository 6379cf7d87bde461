use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{NoiseSpec, TrajectorySpec, DEFAULT_G0};
use crate::so3::{normalize_s2, Rotation, UnitVec3, Vec3};

/// Environment variable the command-line tool reads to override the configured noise seed.
pub const SEED_ENV: &str = "VELATT_SEED";

/// Noise model: the literal `"none"` or a full specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseConfig {
    Off(NoNoise),
    On(NoiseSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoNoise {
    None,
}

impl NoiseConfig {
    pub fn spec(&self) -> NoiseSpec {
        match self {
            NoiseConfig::Off(_) => NoiseSpec::none(),
            NoiseConfig::On(s) => *s,
        }
    }

    pub fn is_off(&self) -> bool {
        matches!(self, NoiseConfig::Off(_))
    }
}

/// Gains of a two-step tilt stage. Without explicit `alphas` all chain poles
/// are placed at `−2√(γ g₀)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStepConfig {
    #[serde(default = "default_order")]
    pub order: usize,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
}

fn default_order() -> usize {
    2
}

/// Tilt component of an attitude observer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageConfig {
    TwoStep(TwoStepConfig),
    Hua { k1v: f64, k2v: f64, k1r: f64 },
}

/// Which tilt an attitude observer reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltOutput {
    /// The tilt stage's own estimate.
    Stage,
    /// `R̂ᵀe_z`.
    Attitude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    TwoStep(TwoStepConfig),
    OneStep {
        alpha: f64,
        gamma: f64,
    },
    Hua {
        k1v: f64,
        k2v: f64,
        k1r: f64,
    },
    Attitude {
        rho1: f64,
        rho2: f64,
        mu: f64,
        stage: StageConfig,
        /// Defaults to the stage when `ρ₂ = 0` and to `R̂ᵀe_z` otherwise.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tilt_output: Option<TiltOutput>,
    },
    Martin {
        l: f64,
        k: f64,
        m: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub name: String,
    #[serde(flatten)]
    pub kind: EstimatorKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    Truth,
    UndesiredEquilibrium,
    /// Explicit `R̂(0)`, row-major.
    Explicit([f64; 9]),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub trajectory: TrajectorySpec,
    pub noise: NoiseConfig,
    /// World magnetic direction (normalized on load).
    #[serde(default = "default_m")]
    pub m: [f64; 3],
    #[serde(default = "default_g0")]
    pub g0: f64,
    pub estimators: Vec<EstimatorConfig>,
    pub init: InitPolicy,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_m() -> [f64; 3] {
    let s = 0.5f64.sqrt();
    [s, 0.0, s]
}

fn default_g0() -> f64 {
    DEFAULT_G0
}

fn default_window() -> [f64; 2] {
    [2.0, 10.0]
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.trajectory.validate().map_err(cfg)?;
        self.noise.spec().validate().map_err(cfg)?;
        self.field().map_err(cfg)?;
        if !(self.g0 > 0.0 && self.g0.is_finite()) {
            return Err(Error::Config(format!("g0 must be positive, got {}", self.g0)));
        }
        let mut names: Vec<&str> = self.estimators.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate estimator name {:?}", w[0])));
        }
        if names.iter().any(|n| n.is_empty() || n.contains(',')) {
            return Err(Error::Config("estimator names must be non-empty and contain no commas".into()));
        }
        let [t0, t1] = self.window;
        if !(0.0 <= t0 && t0 < t1 && t1 <= self.trajectory.duration + 1e-9) {
            return Err(Error::Config(format!(
                "metrics window [{t0}, {t1}] must lie within [0, {}]",
                self.trajectory.duration
            )));
        }
        if let InitPolicy::Explicit(r) = &self.init {
            Rotation::from_matrix(*Rotation::from_row_major_unchecked(r).matrix()).map_err(cfg)?;
        }
        Ok(())
    }

    pub fn field(&self) -> Result<UnitVec3> {
        normalize_s2(&Vec3::from(self.m))
    }

    /// Seed of the measurement-noise stream.
    pub fn seed(&self) -> u64 {
        self.noise.spec().seed
    }

    /// Replaces the noise seed (a no-op for noise-free scenarios).
    pub fn set_seed(&mut self, seed: u64) {
        if let NoiseConfig::On(spec) = &mut self.noise {
            spec.seed = seed;
        }
    }

    /// Reference comparison: five estimators on a 10 s trajectory with the
    /// reference sensor noise, started at the undesired equilibrium.
    pub fn comparison(seed: u64) -> Self {
        let g0 = DEFAULT_G0;
        let gamma = 20.0;
        let alpha = 2.0 * (gamma * g0).sqrt();
        let stage = TwoStepConfig { order: 2, gamma, alphas: Some(vec![gamma * g0, alpha]) };
        ScenarioConfig {
            // noise is drawn per sample, so the sampling rate sets the effective noise level
            trajectory: TrajectorySpec { seed, dt: COMPARISON_DT, ..TrajectorySpec::default() },
            noise: NoiseConfig::On(NoiseSpec::reference(seed)),
            m: default_m(),
            g0,
            estimators: vec![
                EstimatorConfig {
                    name: "hierarchic".into(),
                    kind: EstimatorKind::Attitude {
                        rho1: gamma,
                        rho2: 0.0,
                        mu: 20.0,
                        stage: StageConfig::TwoStep(stage.clone()),
                        tilt_output: None,
                    },
                },
                EstimatorConfig {
                    name: "invariant".into(),
                    kind: EstimatorKind::Attitude {
                        rho1: gamma,
                        rho2: 20.0,
                        mu: 0.0,
                        stage: StageConfig::TwoStep(stage),
                        tilt_output: None,
                    },
                },
                EstimatorConfig { name: "one_step".into(), kind: EstimatorKind::OneStep { alpha, gamma } },
                EstimatorConfig {
                    name: "hua".into(),
                    kind: EstimatorKind::Attitude {
                        rho1: gamma,
                        rho2: 0.0,
                        mu: 20.0,
                        stage: StageConfig::Hua { k1v: alpha, k2v: alpha, k1r: gamma },
                        tilt_output: None,
                    },
                },
                EstimatorConfig {
                    name: "martin".into(),
                    kind: EstimatorKind::Martin { l: alpha / 2.0, k: alpha / 2.0, m: 20.0 },
                },
            ],
            init: InitPolicy::UndesiredEquilibrium,
            window: default_window(),
            outputs: OutputConfig::default(),
        }
    }
}

/// Sampling step of the noisy comparison scenario (200 Hz).
pub const COMPARISON_DT: f64 = 5e-3;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_config_round_trips() {
        let cfg = ScenarioConfig::comparison(3);
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn noise_none_literal() {
        let text = r#"{"noise": "none", "estimators": [], "init": "truth"}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert!(cfg.noise.is_off());
        assert_eq!(cfg.trajectory, TrajectorySpec::default());
    }

    #[test]
    fn rejects_duplicates_and_bad_window() {
        let mut cfg = ScenarioConfig::comparison(0);
        cfg.estimators[1].name = cfg.estimators[0].name.clone();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = ScenarioConfig::comparison(0);
        cfg.window = [2.0, 11.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parse_error_names_location() {
        let err = ScenarioConfig::from_json("{\n  \"noise\": 5\n}").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }
}

#[cfg(test)]
mod seed_tests {
    use super::*;

    #[test]
    fn set_seed_only_touches_noise() {
        let mut cfg = ScenarioConfig::comparison(3);
        cfg.set_seed(9);
        assert_eq!(cfg.seed(), 9);
        assert_eq!(cfg.trajectory.seed, 3);
        cfg.noise = NoiseConfig::Off(NoNoise::None);
        cfg.set_seed(4);
        assert_eq!(cfg.seed(), 0);
    }
}
