use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("entries sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("a profile needs at least one agent")]
    EmptyProfile,
    #[error("at least {min} alternatives are required, got {got}")]
    TooFewAlternatives { min: usize, got: usize },
    #[error("{0} preferences have no scalar utility; use a leximin comparison")]
    NoScalarUtility(&'static str),
    #[error("unknown utility model `{0}`")]
    UnknownModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mechanism `{mechanism}` is not applicable: {reason}")]
    Incompatible { mechanism: String, reason: String },
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("grid with {points} points exceeds the enumeration budget of {budget}")]
    GridBudget { points: u128, budget: u128 },
    #[error("exact elimination supports at most {max} variables, got {got}")]
    DimensionOverflow { max: usize, got: usize },
}
