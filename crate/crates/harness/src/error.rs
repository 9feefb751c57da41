use thiserror::Error;
use twocons_model::{ModelError, NumericError};
use twocons_pde::PdeError;
use twocons_sim::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("model fails its structural conditions: {0}")]
    Conditions(String),
    #[error("checkpoint {t} is not before the oracle blow-up time {blowup}")]
    CheckpointAfterBlowup { t: f64, blowup: f64 },
    #[error("enumeration of {size} configurations exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
