use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by region construction, simulation and I/O.
#[derive(Debug, Error)]
pub enum JcrError {
    #[error("empty sample")]
    EmptySample,

    #[error("out of window: {axis} = {value} not in [{lo}, {hi}]")]
    OutOfWindow {
        axis: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("grid mismatch: regions are defined on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reference law lacks requested quantiles: {0}")]
    MissingQuantile(String),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("group has {order} elements, above the enumeration budget of {budget}; use the randomized construction")]
    GroupTooLarge { order: String, budget: u64 },

    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },

    #[error("decomposition inconsistent with group action: {0}")]
    Decomposition(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = JcrError> = std::result::Result<T, E>;

impl JcrError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        JcrError::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        JcrError::Io {
            path: path.into(),
            source,
        }
    }
}
