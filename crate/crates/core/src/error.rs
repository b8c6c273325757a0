use thiserror::Error;

use crate::geometry::Point;

/// Errors produced by the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("iteration did not converge after {iterations} steps")]
    Convergence { iterations: usize, best: Point },

    #[error("resource cap exceeded: {what} ({value} > {cap})")]
    ResourceCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
