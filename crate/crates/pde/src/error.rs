use thiserror::Error;

use crate::solver::SolverRun;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("complex eigenvalues at ({rho}, {u}): discriminant {disc:e}")]
    ComplexEigenvalues { rho: f64, u: f64, disc: f64 },
    #[error("Riemann-invariant exponents degenerate at gamma = 3/4")]
    DegenerateGamma,
    #[error("state ({rho}, {u}) left the flux domain at t = {t}")]
    DomainExit { rho: f64, u: f64, t: f64 },
    #[error("gradient blow-up at t = {time} before t_end")]
    BlowupBeforeT { time: f64, run: Box<SolverRun> },
    #[error("invalid input: {0}")]
    Invalid(String),
}
