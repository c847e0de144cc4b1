use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// CSV cell that failed to parse, with 1-based data row and column name.
    #[error("csv error in `{path}` at data row {row}, column `{column}`: {reason}")]
    Csv {
        path: String,
        row: usize,
        column: String,
        reason: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("zero-variance channel `{0}`")]
    ZeroVariance(String),

    #[error("channel {channel} could not be made stationary: {reason}")]
    NotStationary { channel: usize, reason: String },

    #[error("singular regression: {0}")]
    Singular(String),

    #[error("trajectory of `{system}` diverged at step {step}")]
    Divergence { system: String, step: usize },

    #[error("{0}")]
    Aggregation(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
