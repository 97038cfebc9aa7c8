//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HardyError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("derivative order {order} exceeds truncation {truncation}")]
    DerivativeOrder { order: usize, truncation: usize },

    #[error("channel {channel} out of range 1..={channels}")]
    ChannelOutOfRange { channel: usize, channels: usize },

    #[error("truncation {truncation} too small for degree {degree} on {channels} channels")]
    TruncationTooSmall {
        truncation: usize,
        degree: usize,
        channels: usize,
    },

    #[error("gramian is numerically singular (min eigenvalue {min_eig:.3e}); the pair is not observable or zeros nearly coincide")]
    SingularGramian { min_eig: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate interpolation data: {0}")]
    DegenerateSolve(String),

    #[error("constraint is void: every function is a solution")]
    Underdetermined,

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("norm bound violated: {0}")]
    NormBound(String),
}
