//! Continuous-time simulation of two-conservation-law lattice gases on the
//! discrete torus.
//!
//! The generator is `lambda(n) L + kappa(n) K` with speeds from a
//! [`ScalingPlan`]. Trajectories are exact in law (uniformization), replayable
//! from `(seed, replica)`, and summarized by block-averaged empirical fields.

pub mod dynamics;
pub mod error;
pub mod fields;
pub mod generator;
pub mod plan;
pub mod state;

pub use dynamics::{simulate, simulate_traced, Event, RateTable};
pub use error::SimError;
pub use fields::{block_average, empirical_fields, observables, weight, write_fields_csv};
pub use generator::{
    decode, detailed_balance_residual, encode, generator_matrix, product_measure, stationarity_residual, Generator,
    GeneratorPart, MAX_STATES,
};
pub use plan::{ScalingMode, ScalingPlan};
pub use state::{sample_local_equilibrium, LatticeState};
