use crate::error::{MopError, Result};
use crate::functionals::{MopSystem, Support};
use crate::lattice::{cc_fill, marginals_for, Bound, NnrrLattice};
use crate::numerics::{MultiIndex, Scalar};
use crate::recurrence::{marginal_jacobi, JacobiData};

use super::TransformSpec;

/// `(ν, μ_r)` with `μ_r ∈ L_m` the functional whose degree-`m` polynomial is `Φ`.
pub fn augment_system<T: Scalar>(sys: &MopSystem<T>, t: &TransformSpec<T>) -> Result<MopSystem<T>> {
    Ok(sys.with_appended(t.functional()?))
}

/// Output of [`transform_nnrr`].
#[derive(Debug, Clone)]
pub struct Transformed<T> {
    /// Recurrence coefficients of `Φν` over `r - 1` axes, up to `|k| = dmax`.
    pub lattice: NnrrLattice<T>,
    /// The full lattice of the augmented system, up to `dmax + m`.
    pub augmented: NnrrLattice<T>,
    /// Weights of `μ_r` actually used: one per distinct root, or one per
    /// derivative order for a confluent `Φ` after a retry.
    pub weights: Vec<T>,
    /// Whether the default weights left gaps and the seeded retry was used.
    pub retried: bool,
    /// Divisor breakdowns recorded at or below the slab `n_r = m`.
    pub breakdowns: Vec<(MultiIndex, usize, usize)>,
}

/// Gaps at or below the slab `n_r = m`: unreachable cells, plus missing
/// `a`/`b` on the non-`r` axes of reachable slab cells.
fn defects<T: Scalar>(lat: &NnrrLattice<T>, m: usize) -> usize {
    let r = lat.rank();
    let mut count = 0;
    for n in lat.indices() {
        if n[r - 1] > m {
            continue;
        }
        if !lat.is_normal(&n) {
            count += 1;
        } else if n[r - 1] == m && crate::numerics::index_len(&n) < lat.dmax() {
            count += (0..r - 1).filter(|&j| lat.b(&n, j).is_none() || lat.a(&n, j).is_none()).count();
        }
    }
    count
}

fn fill_augmented<T: Scalar>(
    sys: &MopSystem<T>,
    t: &TransformSpec<T>,
    weights: Option<Vec<T>>,
) -> Result<NnrrLattice<T>> {
    let m = t.degree();
    let depth = t.dmax + m;
    let (mut marginals, mut bounds) = marginals_for(sys, depth)?;
    let last = marginal_jacobi(&t.functional_with(weights)?, m)?;
    if last.support != Support::Finite(m) {
        return Err(MopError::QuasiDefiniteViolation { n: last.len() + 1 });
    }
    marginals.push(last);
    bounds.push(Bound { cap: m, finite_support: true });
    cc_fill(&marginals, &bounds, depth)
}

/// Recurrence coefficients of `Φν` read off the slab `n_r = m` of the
/// augmented lattice.
///
/// When the default weights leave gaps at or below the slab, one retry with
/// [`TransformSpec::retry_weights`] is made and kept if it has fewer gaps.
/// Gaps that remain are indices where `Φν` itself is not normal (or a
/// divisor vanished); they are marked in the lattice and listed in
/// [`Transformed::breakdowns`].
pub fn transform_nnrr<T: Scalar>(sys: &MopSystem<T>, t: &TransformSpec<T>) -> Result<Transformed<T>> {
    let m = t.degree();
    let r = sys.rank() + 1;
    let default = t.weights().map_or_else(|| vec![T::one(); t.roots().len()], <[T]>::to_vec);
    let first = fill_augmented(sys, t, Some(default.clone()))?;
    let gaps = defects(&first, m);
    let (augmented, weights, retried) = if gaps == 0 {
        (first, default, false)
    } else {
        let alt = t.retry_weights();
        let second = fill_augmented(sys, t, Some(alt.clone()))?;
        if defects(&second, m) < gaps {
            (second, alt, true)
        } else {
            (first, default, false)
        }
    };
    let lattice = augmented.slab(r - 1, m);
    let breakdowns = augmented.breakdowns().iter().filter(|(n, _, _)| n[r - 1] <= m).cloned().collect();
    Ok(Transformed { lattice, augmented, weights, retried, breakdowns })
}

/// Output of [`repeated_transform`].
#[derive(Debug, Clone)]
pub struct RepeatedTransform<T> {
    /// The extended lattice with the improper last axis.
    pub extended: NnrrLattice<T>,
    /// `offsets[s] = m_1 + … + m_s`, starting with `0`.
    pub offsets: Vec<usize>,
    /// `slabs[s]`: coefficients of `Φ_1 ⋯ Φ_s ν` (`slabs[0]` is `ν` itself).
    pub slabs: Vec<NnrrLattice<T>>,
}

/// Jacobi data of the direct sum of the finite blocks `J^{(1)} ⊕ J^{(2)} ⊕ …`:
/// the blocks' coefficients with `a = 0` at every block boundary.
pub fn direct_sum_jacobi<T: Scalar>(specs: &[TransformSpec<T>]) -> Result<JacobiData<T>> {
    let mut b = Vec::new();
    let mut a = vec![T::zero()];
    let mut c0 = None;
    for t in specs {
        let m = t.degree();
        let block = marginal_jacobi(&t.functional()?, m)?;
        if block.support != Support::Finite(m) {
            return Err(MopError::QuasiDefiniteViolation { n: block.len() + 1 });
        }
        c0.get_or_insert(block.c0.clone());
        b.extend(block.b.iter().cloned());
        a.extend(block.a[1..m].iter().cloned());
        a.push(T::zero());
    }
    let c0 = c0.ok_or_else(|| MopError::Usage("at least one transform is needed".into()))?;
    JacobiData::new(b, a, c0, Support::Infinite)
}

/// Runs one CC fill with the improper last axis `J_r = ⊕ J^{(s)}`, treating
/// `N_r` as infinite, and extracts the slab `n_r = m_1 + … + m_s` for each `s`.
/// Unreachable cells stay marked in `extended` and its slabs.
pub fn repeated_transform<T: Scalar>(
    sys: &MopSystem<T>,
    specs: &[TransformSpec<T>],
    dmax: usize,
) -> Result<RepeatedTransform<T>> {
    let last = direct_sum_jacobi(specs)?;
    let total = last.len();
    let depth = dmax + total;
    let (mut marginals, mut bounds) = marginals_for(sys, depth)?;
    marginals.push(last);
    bounds.push(Bound { cap: total, finite_support: false });
    let extended = cc_fill(&marginals, &bounds, depth)?;
    let r = sys.rank() + 1;
    let mut offsets = vec![0];
    for t in specs {
        offsets.push(offsets.last().expect("nonempty") + t.degree());
    }
    let slabs = offsets.iter().map(|&o| extended.slab(r - 1, o)).collect();
    Ok(RepeatedTransform { extended, offsets, slabs })
}

/// The functional `Φ_1 ⋯ Φ_s ν` as a system, for oracle comparisons.
pub fn transformed_system<T: Scalar>(sys: &MopSystem<T>, specs: &[TransformSpec<T>]) -> Result<MopSystem<T>> {
    let mut out = sys.clone();
    for t in specs {
        out = out.modified(&t.phi())?;
    }
    Ok(out)
}
