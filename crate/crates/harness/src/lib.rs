//! End-to-end experiments for two-conservation-law lattice gases.
//!
//! Replica-averaged block fields of the particle system are compared with
//! smooth solutions of the limiting PDE under Eulerian and low-density
//! scalings, together with weak pairings against trigonometric test
//! functions. Relative entropies are not estimated; the weak pairings serve
//! as their measurable surrogate. Two static checks complete the harness:
//! Poisson and Gaussian domination of block-average tails, and exhaustive
//! conditional exponential moments on small blocks.

pub mod config;
pub mod convergence;
pub mod error;
pub mod microcanonical;
pub mod tails;

pub use config::{ExperimentConfig, InitialSettings, OracleSettings, Profile, ScalingSettings, TestFn};
pub use convergence::{model_oracle_flux, run_eulerian, run_intermediate, ConvergenceReport, DistanceRow, WeakRow};
pub use error::HarnessError;
pub use microcanonical::{
    default_gammas, microcanonical_moment_check, Centering, MomentReport, MomentRow, PairObservable,
};
pub use tails::{tail_checks, TailLevel, TailReport, TailSettings};
