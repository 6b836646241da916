//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by measure construction, distance computation, chain
/// simulation, bound evaluation, and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A weight vector failed nonnegativity or normalization.
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Two measures cannot be aligned on a common support.
    #[error("incompatible supports: {0}")]
    IncompatibleSupports(String),

    /// A measure places mass where the reference law has none.
    #[error("not dominated: mass at {0} where the reference law has none")]
    NotDominated(String),

    /// An exact enumeration would exceed its atom budget.
    #[error("support too large: {got} atoms exceeds the limit of {limit}")]
    SupportTooLarge { got: usize, limit: usize },

    /// A state fell outside the chain's declared state space.
    #[error("state outside the declared space: {0}")]
    StateOutsideSpace(String),

    /// A function profile is missing the attribute a generator needs.
    #[error("profile incomplete: {0}")]
    ProfileIncomplete(String),

    /// An iterative routine failed to converge within its budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The requested operation needs a spectral gap that does not exist.
    #[error("no spectral gap: {0}")]
    NoSpectralGap(String),

    /// A parameter violated its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Mismatched vector lengths in a multi-input operation.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Configuration file problems (missing keys, unknown keys, bad values).
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
