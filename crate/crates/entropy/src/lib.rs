//! Entropy/entropy-flux pairs for two-by-two systems built from the Lax
//! equation in Riemann-invariant coordinates, with the cutoff geometry,
//! Goursat and Cauchy solvers, and bound verification.

pub mod coeffs;
pub mod bounds;
pub mod cutoff;
pub mod error;
pub mod geometry;
pub mod goursat;
pub mod lattice;
pub mod table;

pub use bounds::*;
pub use coeffs::*;
pub use cutoff::*;
pub use error::EntropyError;
pub use geometry::*;
pub use goursat::*;
pub use lattice::*;
pub use table::*;
