use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("squeezing parameter must be non-negative, got {0}")]
    NegativeSqueezing(f64),
    #[error("transmissivity must lie in [0, 1], got {0}")]
    InvalidTransmissivity(f64),
    #[error("mode {0} does not exist")]
    UnknownMode(usize),
    #[error("mode {0} has been consumed by a measurement")]
    ModeConsumed(usize),
    #[error("a two-mode operation needs distinct modes, got {0} twice")]
    DuplicateMode(usize),
    #[error("{what} must be at least 1, got {value}")]
    InvalidCount { what: &'static str, value: usize },
    #[error("source list is empty")]
    EmptySources,
    #[error("measurement records share consumed mode {0}")]
    OverlappingRecords(usize),
    #[error("measurement record does not commute with target rows (defect {0:e})")]
    NonCommuting(f64),
    #[error("covariance is singular")]
    SingularCovariance,
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("invalid protocol specification: {0}")]
    InvalidSpec(String),
    #[error("no closed form available: {0}")]
    NoClosedForm(String),
    #[error("at least {min} samples required, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
