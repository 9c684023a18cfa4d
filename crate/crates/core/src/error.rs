use thiserror::Error;

/// Errors produced by the value-of-information solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VoiError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration of {needed} candidates exceeds the cap of {cap}")]
    EnumerationCap { needed: u128, cap: u64 },

    #[error("unknown paradox `{0}`")]
    UnknownParadox(String),

    #[error("reference distribution has a zero coordinate at index {0}")]
    BoundaryReference(usize),

    #[error("unsupported dimension for {what}: {detail}")]
    UnsupportedDimension { what: &'static str, detail: String },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, VoiError>;
