use thiserror::Error;
use twocons_pde::PdeError;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("the characteristic ODE is singular at the origin (r = {0})")]
    SingularStart(f64),
    #[error("Goursat iteration does not contract: {0}")]
    NoContraction(String),
    #[error("closed-form and marched values disagree on the overlap by {diff:e} (tolerance {tol:e})")]
    InconsistentOverlap { diff: f64, tol: f64 },
    #[error("structural condition fails: {0}")]
    Condition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Pde(#[from] PdeError),
}
