use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("numerical divergence at t = {time:.4} s")]
    Divergence { time: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("transform produced a non-finite value at point {point:?}")]
    NonFiniteTransform { point: Vec<f64> },

    #[error("covariance matrix not positive definite after jitter {jitter:e}")]
    Cholesky { jitter: f64 },

    #[error("Sobol dimension {0} outside supported range 1..=64")]
    SobolDimension(usize),

    #[error("Sobol sequence supports at most {max} points, requested {requested}")]
    SobolLength { requested: usize, max: usize },

    #[error("all {0} candidates have already been evaluated")]
    CandidatesExhausted(usize),

    #[error("training diverged: {0}")]
    Training(String),

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("inconsistent runs: {0}")]
    Inconsistent(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
