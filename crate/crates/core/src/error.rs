use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("query ({px:.3}, {py:.3}) lies outside the value grid")]
    QueryOutsideGrid { px: f64, py: f64 },

    #[error("innovation covariance is singular")]
    SingularInnovation,

    #[error("CFL violation: dt {dt} exceeds stable limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("value function not monotone in time-to-go at slice {slice}, node {node}")]
    NonMonotoneTube { slice: usize, node: usize },

    #[error("oracle instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("lookahead forecast is empty")]
    EmptyForecast,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("policy `{0}` needs a solved value function")]
    MissingValueFunction(&'static str),

    #[error("malformed value file: {0}")]
    BadValueFile(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
