//! Christoffel transforms `ν ↦ Φν` of multiple orthogonality systems: the
//! augmented-system route through the CC fill, determinantal formulas for
//! type II and type I polynomials, kernel identities and repeated transforms.

mod det;
mod kernel;
mod nnrr;
mod spec;

pub use det::{
    onestep_table, step_line_shifts, transform_type1_det, transform_type1_onestep, transform_type2_det,
    transform_type2_iterated, transform_type2_onestep, type1_two_term,
};
pub use kernel::{kernel_identities, KernelIdentities};
pub use nnrr::{
    augment_system, direct_sum_jacobi, repeated_transform, transform_nnrr, transformed_system, RepeatedTransform,
    Transformed,
};
pub use spec::{TransformSpec, RETRY_SEED};
