use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("quadrature did not converge (last error estimate {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error("precision error: {0}")]
    Precision(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("property violation: {0}")]
    PropertyViolation(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("ill-conditioned system (condition number {condition:e}); supply more or better spread samples")]
    IllConditioned { condition: f64 },
    #[error("unusable solution: residual {residual:e} exceeds threshold {threshold:e}")]
    Unusable { residual: f64, threshold: f64 },
    #[error("internal identity mismatch: {0}")]
    Identity(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
