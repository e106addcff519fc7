use crate::monotone::UnitPoint;
use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// The two observations that together break monotonicity: a negative point
/// that dominates (componentwise ≥) a positive one.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct Violation {
    pub negative: UnitPoint,
    pub positive: UnitPoint,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    Usage(String),

    #[error("non-monotone oracle: negative {:?} dominates positive {:?}", .0.negative, .0.positive)]
    NonMonotone(Violation),

    #[error("corrupted design state: {point:?} is both certainly negative and certainly positive")]
    CorruptState { point: UnitPoint },

    #[error("{0}")]
    Domain(String),

    #[error("oracle failed at {point:?}: {message}")]
    Oracle { point: UnitPoint, message: String },

    #[error("classifier needs at least {needed} points of each class (negative {negative}, positive {positive})")]
    MajorityFallback {
        needed: usize,
        negative: usize,
        positive: usize,
    },

    #[error("session {0} not found")]
    SessionNotFound(String),

    #[error("session state conflict: {0}")]
    SessionState(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
