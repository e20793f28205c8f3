//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Occupation number does not fit on the truncated space.
    #[error("occupation {occupation} exceeds cutoff {cutoff}")]
    OccupationOutOfRange { occupation: usize, cutoff: usize },

    /// Parameter outside its valid domain.
    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Two states that must share a cutoff do not.
    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    /// Operation applied to a state with the wrong number of modes.
    #[error("expected a {expected}-mode state, got {got} modes")]
    ModeMismatch { expected: usize, got: usize },

    /// The truncated space is too small for the result to be trusted.
    #[error("truncation guard: {0}")]
    Truncation(String),

    /// Post-selection succeeded with probability zero.
    #[error("degenerate post-selection: zero success probability")]
    DegeneratePostSelection,

    /// A count needed in an estimator denominator is zero.
    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    /// Malformed serialized state.
    #[error("invalid state data: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
