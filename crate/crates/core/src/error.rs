use thiserror::Error;

/// Errors produced by model validation, test evaluation, and root finding.
#[derive(Debug, Error)]
pub enum GofError {
    #[error("cell model needs at least 2 cells, got {0}")]
    TooFewCells(usize),
    #[error("cell probability at index {index} must be positive and finite, got {value}")]
    NonPositiveProbability { index: usize, value: f64 },
    #[error("cell probabilities sum to {sum}; expected 1 within {tolerance}")]
    ProbabilitySum { sum: f64, tolerance: f64 },
    #[error("weight at index {index} must be nonnegative and finite, got {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}; expected {expected} within {tolerance}")]
    WeightSum {
        sum: f64,
        expected: f64,
        tolerance: f64,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("total observed count is zero")]
    ZeroTotalCount,
    #[error("count total overflows u64")]
    CountOverflow,
    #[error("degenerate variance: {0} is zero")]
    DegenerateVariance(&'static str),
    #[error("weighted test requires a weight vector")]
    MissingWeights,
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("root finding failed to converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, GofError>;
