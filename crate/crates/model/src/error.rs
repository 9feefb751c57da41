use thiserror::Error;

/// Errors raised while building or validating a [`crate::SpinModel`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("reference measure is not a probability vector: {0}")]
    InvalidMeasure(String),
    #[error("involution is broken: {0}")]
    BrokenInvolution(String),
    #[error("invalid rate table: {0}")]
    InvalidRates(String),
    #[error("invalid model description: {0}")]
    InvalidSpec(String),
    #[error("unknown built-in model `{0}`")]
    UnknownModel(String),
    #[error("structural conditions failed: {0}")]
    ConditionsFailed(String),
}

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("point ({rho}, {u}) is not in the interior of the domain")]
    OutOfDomain { rho: f64, u: f64 },
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}
