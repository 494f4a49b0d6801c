//! Zeros of generated polynomials, strict interlacing and mesh checks.

mod interlace;
mod roots;
mod suite;

pub use interlace::{interlace, interlace_with, InterlaceReport, Interlacing};
pub use roots::{mesh, roots, RootSet};
pub use suite::{default_families, interlacing_suite, mesh_suite, SuiteReport, SuiteRow, CSV_COLUMNS, CSV_VERSION};
