//! Multi-index machinery: the CC fill of nearest-neighbour recurrence
//! coefficients, compatibility residuals, type II and type I polynomials,
//! normality predicates and the multivariate Christoffel–Darboux kernel.

mod fill;
pub mod kernel;
pub mod oracle;
pub mod polys;
pub mod residuals;

pub use fill::{cc_fill, Bound, Cell, CellStatus, NnrrLattice};
pub use kernel::{cd_kernel, cd_residual, CdKernel};
pub use oracle::{
    inner, normality, oracle_a, oracle_b, perfectness_scan, type1_solve, type2_oracle, Normality,
    PerfectnessReport, TypeIVector,
};
pub use polys::{nnr_cor_residual, type1_cor_residual, type1_residual, type2_coeffs, Type2Table};
pub use residuals::{cc_residuals, ResidualReport};

use crate::error::Result;
use crate::functionals::{MopSystem, Support};
use crate::numerics::Scalar;
use crate::recurrence::{marginal_jacobi, JacobiData};

/// Axis bounds for a system: finite support becomes a hard cap, infinite
/// support is capped at `dmax`.
pub fn bounds_for<T: Scalar>(sys: &MopSystem<T>, dmax: usize) -> Vec<Bound> {
    sys.functionals
        .iter()
        .map(|f| match f.support() {
            Support::Finite(n) => Bound { cap: n, finite_support: true },
            Support::Infinite => Bound { cap: dmax, finite_support: false },
        })
        .collect()
}

/// Marginal Jacobi data and axis bounds of a system for a fill up to `|n| = dmax`.
///
/// Bounds follow the marginals, so finite support detected from the moments
/// is honoured even when the functional did not declare it.
pub fn marginals_for<T: Scalar>(sys: &MopSystem<T>, dmax: usize) -> Result<(Vec<JacobiData<T>>, Vec<Bound>)> {
    let marginals = sys
        .functionals
        .iter()
        .zip(bounds_for(sys, dmax))
        .map(|(f, bd)| {
            let len = if bd.finite_support { bd.cap.min(dmax + 1) } else { dmax + 1 };
            marginal_jacobi(f, len)
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds = marginals
        .iter()
        .map(|m| match m.support {
            Support::Finite(n) => Bound { cap: n, finite_support: true },
            Support::Infinite => Bound { cap: dmax, finite_support: false },
        })
        .collect();
    Ok((marginals, bounds))
}

/// CC fill of a whole system up to `|n| = dmax`.
pub fn lattice_for_system<T: Scalar>(sys: &MopSystem<T>, dmax: usize) -> Result<NnrrLattice<T>> {
    let (marginals, bounds) = marginals_for(sys, dmax)?;
    cc_fill(&marginals, &bounds, dmax)
}
