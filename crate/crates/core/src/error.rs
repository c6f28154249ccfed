//! Error type shared across the simulator, metrics, and detector layers.

use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a documented constraint.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An operation was asked to aggregate over an empty input.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A ratio whose denominator is zero or negative; reported as
    /// undefined rather than infinity.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// A trace is too short for the requested analysis.
    #[error("trace too short: have {have} s, need at least {need} s ({context})")]
    TraceTooShort {
        have: u64,
        need: u64,
        context: String,
    },

    /// Training input whose labels are all one class.
    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    /// A feature vector whose arity does not match the trained model.
    #[error("feature arity mismatch: model expects {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    /// Malformed scenario, dataset, or model input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Filesystem failure while reading or writing an artifact.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
