use thiserror::Error;

/// Errors raised by the workbench.
///
/// Variants fall in four families that the CLI maps onto exit codes:
/// structural/domain problems with the inputs, precision problems (a finite
/// boundary prefix is too short to determine the answer), resource limits
/// (an exhaustive enumeration would exceed its cap) and invariant violations
/// (a checked inequality failed).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u8, u8),

    #[error("invalid rank {0}: rank must be in 2..=127")]
    InvalidRank(u32),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
