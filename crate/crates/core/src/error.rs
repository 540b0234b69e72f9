use thiserror::Error;

/// Errors raised by the estimators, formulas and simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A structural invariant (monotone quantiles, sorted grids, ...) does not hold.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),
    /// A numerical procedure failed to reach the requested accuracy.
    #[error("precision error: {0}")]
    Precision(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Precision(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
