use thiserror::Error;
use twocons_model::NumericError;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("profile point ({rho}, {u}) at site {site} is outside the model domain")]
    OutOfDomain { site: usize, rho: f64, u: f64 },
    #[error("state space of size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("scaling plan rejected: {0}")]
    InvalidPlan(String),
    #[error("conserved totals changed from {before:?} to {after:?}")]
    ConservationViolated { before: (i64, i64), after: (i64, i64) },
    #[error("malformed state dump: {0}")]
    BadDump(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}
