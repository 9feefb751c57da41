//! Lattice gases with two conserved quantities.
//!
//! A [`SpinModel`] describes one site: its states, the particle number `eta`
//! and slope `zeta` of each state, a reference measure and two nearest-neighbour
//! rate tables (asymmetric `r`, symmetric `s`). This crate checks the
//! structural conditions on those tables, builds canonical measures and
//! computes the macroscopic fluxes by exact summation.

pub mod conditions;
pub mod domain;
pub mod error;
pub mod field;
pub mod flux;
pub mod measure;
pub mod model;
pub mod numdiff;
pub mod spec;

pub use conditions::{validate_conditions, ConditionReport, ConditionResult};
pub use domain::Domain;
pub use error::{ModelError, NumericError};
pub use field::{Field, FieldKind};
pub use flux::{macroscopic_flux, onsager_residual, FluxPair, FluxPartials};
pub use measure::{
    gibbs_measure, invert_parameters, log_partition, moments, site_law, thermo_entropy,
    CanonicalParams, Moments,
};
pub use model::{build_model, pm1, two_lane, ModelSpec, SpinModel};
pub use spec::CustomModel;
