use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by curve construction, pricing, the dataflow engine and IO.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CdsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid term structure: node {index}: {reason}")]
    InvalidCurve { index: usize, reason: String },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),

    #[error("lane count must be at least 1")]
    ZeroLanes,

    #[error("degenerate legs: premium + accrual = {0}, cannot form a spread")]
    DegenerateLegs(f64),

    /// A per-option failure, tagged with the option's position in its batch.
    #[error("option {index}: {source}")]
    Option {
        index: usize,
        #[source]
        source: Box<CdsError>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    /// A dataflow stage died or broke the stream protocol.
    #[error("pipeline stage `{stage}` failed: {reason}")]
    Stage { stage: String, reason: String },
}

impl CdsError {
    pub(crate) fn at_option(self, index: usize) -> Self {
        match self {
            err @ CdsError::Option { .. } => err,
            other => CdsError::Option {
                index,
                source: Box::new(other),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CdsError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = CdsError> = std::result::Result<T, E>;
