//! Moment functionals: named families, point masses, modifications and systems.

pub mod family;
pub mod functional;
pub mod quadrature;

pub use family::FamilySpec;
pub use functional::{MomentFunctional, MopSystem, Source, Support};
pub use quadrature::Discretization;
