use std::path::PathBuf;

use crate::operator::SpaceDim;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("atom index {index} outside the chain [{first}, {last}]")]
    IndexOutOfRange { index: i64, first: i64, last: i64 },

    #[error("expected a vector of length {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("fine mesh does not contain coarse repatom {0}")]
    NonNested(i64),

    #[error("interval {interval} has size {nu} and cannot be bisected")]
    CannotRefine { interval: usize, nu: usize },

    #[error("refinement factor must be at least 2, got {0}")]
    InvalidRefinementFactor(u32),

    #[error("operator space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: SpaceDim, found: SpaceDim },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("relative residual {0:e} exceeds the acceptance threshold")]
    ResidualTooLarge(f64),

    #[error("dual identity violated: direct {direct:e}, dual-weighted residual {dual:e}")]
    DualIdentityMismatch { direct: f64, dual: f64 },

    #[error("invalid adaptivity settings: {0}")]
    InvalidAdaptConfig(String),

    #[error("config {}: `{key}`: {message}", line.map_or("default".to_string(), |l| format!("line {l}")))]
    Config {
        /// `None` when the offending value is a default.
        line: Option<usize>,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
