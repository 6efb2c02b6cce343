use thiserror::Error;

/// Errors raised by estimation, diagnostics and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tuning parameter beta = {0} outside the allowed range [0, 1]")]
    BetaOutOfRange(f64),

    #[error("variance must be positive and finite, got {0}")]
    NonPositiveVariance(f64),

    #[error("correlation {0} outside the open interval (-1, 1)")]
    SingularCorrelation(f64),

    #[error("sample too small: need at least {needed} observations, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("column {column} is degenerate (zero variance)")]
    DegenerateColumn { column: usize },

    #[error("degenerate sample: all values are equal")]
    DegenerateSample,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("singular matrix {name} (condition number {condition:.3e})")]
    SingularMatrix { name: &'static str, condition: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = std::result::Result<T, Error>;
