//! Hyperbolic systems `rho_t + Psi_x = 0`, `u_t + Phi_x = 0` with two conserved
//! fields.
//!
//! Fluxes implement [`Flux`]: the universal low-density system [`LimitFlux`],
//! the closed-form two-lane fluxes, their low-density rescalings, and brute-force
//! model fluxes. On top of that sit eigenstructure and Riemann-invariant
//! diagnostics and two smooth-regime solvers.

pub mod eigen;
pub mod error;
pub mod flux;
pub mod invariants;
pub mod solver;

pub use eigen::{decompose, eigenstructure, limit_speeds, EigenData};
pub use error::PdeError;
pub use flux::{fd_jet, Flux, FluxJet, Jet, LimitFlux, ModelFlux, ScaledFlux, TwoLaneFlux};
pub use invariants::{
    characteristic_curve, convex_entropy, convex_entropy_residual, genuine_nonlinearity, level_line,
    riemann_invariants, sigma_rhs, sigma_rhs_from,
};
pub use solver::{
    discretize, refinement_study, restrict, smooth_solution_oracle, solve, InitialData, Scheme, SolverConfig,
    SolverRun, Snapshot,
};
