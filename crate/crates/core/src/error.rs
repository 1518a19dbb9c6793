use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hurst parameter {0} outside (0, 1/2)")]
    InvalidHurst(f64),

    #[error("fractional order {0} outside (0, 1]")]
    InvalidOrder(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("covariance factorization failed at pivot {pivot} (after jitter {jitter:e})")]
    NotPositiveDefinite { pivot: usize, jitter: f64 },

    #[error("non-finite value in {context} at step {step}")]
    NonFinite { context: &'static str, step: usize },

    #[error("flow lost positivity at step {step} (factor {factor})")]
    FlowSign { step: usize, factor: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}
