//! Multiple orthogonal polynomials: nearest-neighbour recurrence coefficients,
//! Christoffel transforms and zero interlacing.

pub mod christoffel;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod lattice;
pub mod numerics;
pub mod recurrence;
pub mod zeros;

pub use error::{MopError, Result};
