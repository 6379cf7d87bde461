use thiserror::Error;

/// Errors raised by the observers, the simulator and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {0:e} is too small to normalize")]
    NearZeroNorm(f64),

    #[error("degenerate matrix: determinant {0:e}")]
    DegenerateMatrix(f64),

    #[error("matrix is not a rotation (orthonormality error {orthonormality:e}, det {det})")]
    NotARotation { orthonormality: f64, det: f64 },

    #[error("directions are collinear ({0:e} rad apart)")]
    Collinear(f64),

    #[error("companion polynomial is not Hurwitz (max real eigenvalue part {0})")]
    NotHurwitz(f64),

    #[error("gain condition violated: {0}")]
    GainCondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no valid samples in averaging window [{t0}, {t1}]")]
    EmptyWindow { t0: f64, t1: f64 },

    #[error("malformed run record after row {last_complete_row}: {reason}")]
    MalformedRecord { last_complete_row: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("incompatible reports: {0}")]
    IncompatibleReports(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
