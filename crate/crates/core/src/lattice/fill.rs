use rayon::prelude::*;

use crate::error::{MopError, Result};
use crate::numerics::tol::EPS_BREAKDOWN;
use crate::numerics::{index_len, level_set, minus, plus, MultiIndex, Scalar};
use crate::recurrence::JacobiData;

/// Upper bound on one axis of the lattice.
///
/// With `finite_support` the cap is the support size `N_j`, so
/// `a_{n,j} = 0` at `n_j = N_j` and `b_{n,j}` stops at `n_j = N_j - 1`.
/// Otherwise the cap only limits the computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Bound {
    pub cap: usize,
    pub finite_support: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CellStatus {
    /// Normal index with `0 < n_j` on every axis (and below finite caps).
    Normal,
    /// Normal index where some `a_{n,j}` vanishes by convention.
    Boundary,
    /// Reached, so `P_n` is determined, but some `a_{n,j}` are not: every
    /// route to them passes a non-normal neighbour or a vanishing divisor.
    Partial,
    /// Index the recurrence cannot reach: not normal, or a needed `δ` vanished.
    Breakdown,
}

impl CellStatus {
    pub fn is_normal(self) -> bool {
        self != CellStatus::Breakdown
    }

    pub fn name(self) -> &'static str {
        match self {
            CellStatus::Normal => "normal",
            CellStatus::Boundary => "boundary",
            CellStatus::Partial => "partial",
            CellStatus::Breakdown => "breakdown",
        }
    }
}

/// Recurrence data at one multi-index. Missing values are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell<T> {
    pub status: CellStatus,
    pub a: Vec<Option<T>>,
    pub b: Vec<Option<T>>,
}

/// Nearest-neighbour recurrence coefficients over `{n ≤ caps, |n| ≤ dmax}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NnrrLattice<T> {
    r: usize,
    bounds: Vec<Bound>,
    dmax: usize,
    dims: Vec<usize>,
    cells: Vec<Option<Cell<T>>>,
    /// First vanishing divisor met per broken cell: `(n, j, l)`.
    breakdowns: Vec<(MultiIndex, usize, usize)>,
}

impl<T: Scalar> NnrrLattice<T> {
    fn empty(bounds: &[Bound], dmax: usize) -> Self {
        let dims: Vec<usize> = bounds.iter().map(|b| b.cap.min(dmax) + 1).collect();
        let total = dims.iter().product();
        NnrrLattice {
            r: bounds.len(),
            bounds: bounds.to_vec(),
            dmax,
            dims,
            cells: vec![None; total],
            breakdowns: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn dmax(&self) -> usize {
        self.dmax
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// Per-axis index caps (`min(cap, dmax)`).
    pub fn caps(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d - 1).collect()
    }

    fn flat(&self, n: &[usize]) -> Option<usize> {
        if n.len() != self.r || index_len(n) > self.dmax {
            return None;
        }
        let mut idx = 0;
        for (v, d) in n.iter().zip(&self.dims) {
            if v >= d {
                return None;
            }
            idx = idx * d + v;
        }
        Some(idx)
    }

    pub fn contains(&self, n: &[usize]) -> bool {
        self.flat(n).is_some()
    }

    pub fn cell(&self, n: &[usize]) -> Option<&Cell<T>> {
        self.flat(n).and_then(|i| self.cells[i].as_ref())
    }

    pub fn status(&self, n: &[usize]) -> Option<CellStatus> {
        self.cell(n).map(|c| c.status)
    }

    pub fn is_normal(&self, n: &[usize]) -> bool {
        self.status(n).is_some_and(CellStatus::is_normal)
    }

    pub fn a(&self, n: &[usize], j: usize) -> Option<&T> {
        self.cell(n).and_then(|c| c.a[j].as_ref())
    }

    pub fn b(&self, n: &[usize], j: usize) -> Option<&T> {
        self.cell(n).and_then(|c| c.b[j].as_ref())
    }

    /// All `a_{n,·}` when every one is known.
    pub fn a_all(&self, n: &[usize]) -> Option<Vec<T>> {
        self.cell(n)?.a.iter().cloned().collect()
    }

    /// Overwrites one stored `b` value (fault injection in tests).
    pub fn set_b(&mut self, n: &[usize], j: usize, v: T) {
        if let Some(i) = self.flat(n) {
            if let Some(c) = self.cells[i].as_mut() {
                c.b[j] = Some(v);
            }
        }
    }

    /// Indices of the domain in level order, each level lexicographically descending.
    pub fn indices(&self) -> Vec<MultiIndex> {
        let caps = self.caps();
        (0..=self.dmax).flat_map(|d| level_set(self.r, d, &caps)).collect()
    }

    pub fn breakdowns(&self) -> &[(MultiIndex, usize, usize)] {
        &self.breakdowns
    }

    /// Errors on the first cell whose recurrence broke down.
    pub fn require_no_breakdown(&self) -> Result<()> {
        match self.breakdowns.first() {
            Some((n, j, l)) => Err(MopError::Breakdown { n: n.clone(), j: *j, l: *l }),
            None => Ok(()),
        }
    }

    /// Errors if any cell in the domain is not normal.
    pub fn require_normal(&self, n: &[usize]) -> Result<()> {
        if self.is_normal(n) {
            return Ok(());
        }
        match self.breakdowns.iter().find(|b| b.0 == n) {
            Some((n, j, l)) => Err(MopError::Breakdown { n: n.clone(), j: *j, l: *l }),
            None => Err(MopError::NonNormal { n: n.to_vec() }),
        }
    }

    /// The sub-lattice `{(k, value)}` along `axis`, dropping that axis.
    pub fn slab(&self, axis: usize, value: usize) -> Self {
        let bounds: Vec<Bound> =
            self.bounds.iter().enumerate().filter(|(i, _)| *i != axis).map(|(_, b)| *b).collect();
        let mut out = NnrrLattice::empty(&bounds, self.dmax.saturating_sub(value));
        for k in out.indices() {
            let mut n = k.clone();
            n.insert(axis, value);
            if let Some(c) = self.cell(&n) {
                let drop = |v: &Vec<Option<T>>| {
                    v.iter().enumerate().filter(|(i, _)| *i != axis).map(|(_, x)| x.clone()).collect()
                };
                let cell = Cell { status: c.status, a: drop(&c.a), b: drop(&c.b) };
                let i = out.flat(&k).expect("slab index in range");
                out.cells[i] = Some(cell);
            }
        }
        out.breakdowns = self
            .breakdowns
            .iter()
            .filter(|(n, j, l)| n[axis] == value && *j != axis && *l != axis)
            .map(|(n, j, l)| {
                let mut k = n.clone();
                k.remove(axis);
                (k, *j - usize::from(*j > axis), *l - usize::from(*l > axis))
            })
            .collect();
        out
    }

    /// Marginal Jacobi data along one axis, as stored in the lattice.
    pub fn axis_jacobi(&self, j: usize) -> (Vec<Option<T>>, Vec<Option<T>>) {
        let mut b = Vec::new();
        let mut a = Vec::new();
        let mut n = vec![0; self.r];
        while self.contains(&n) {
            a.push(self.a(&n, j).cloned());
            b.push(self.b(&n, j).cloned());
            n[j] += 1;
        }
        (b, a)
    }
}

fn negligible<T: Scalar>(d: &T, x: &T, y: &T) -> bool {
    d.is_negligible(x.abs_f64().max(y.abs_f64()).max(1.0), EPS_BREAKDOWN)
}

/// Fills every cell of `{n ≤ caps, |n| ≤ dmax}` from marginal Jacobi data.
///
/// Level sets `|n| = d` are filled in parallel: first all `a_{n,·}` of the
/// level, then all `b_{n,·}`. Each value uses the smallest admissible
/// neighbour axis `k`, falling back to larger `k` only when an input is
/// missing, so the result does not depend on scheduling.
///
/// A cell is normal when some predecessor `n - e_j` is normal and has
/// `b_{n-e_j,j}`. Non-normal cells are kept with status `Breakdown` and no
/// data; everything depending on them is skipped. Cells whose own `a` cannot
/// all be computed get status `Partial`.
pub fn cc_fill<T: Scalar>(marginals: &[JacobiData<T>], bounds: &[Bound], dmax: usize) -> Result<NnrrLattice<T>> {
    let r = marginals.len();
    if r == 0 || bounds.len() != r {
        return Err(MopError::Usage("need one bound per marginal and at least one axis".into()));
    }
    let mut lat = NnrrLattice::empty(bounds, dmax);
    let caps = lat.caps();
    for d in 0..=dmax {
        let level = level_set(r, d, &caps);
        let stage_a: Vec<(MultiIndex, Option<Vec<Option<T>>>, Option<(usize, usize)>)> =
            level.par_iter().map(|n| fill_a(&lat, marginals, n)).collect();
        for (n, a, broke) in stage_a {
            let i = lat.flat(&n).expect("level index in range");
            lat.cells[i] = Some(match a {
                Some(a) => {
                    let boundary = (0..r).any(|j| n[j] == 0 || (bounds[j].finite_support && n[j] == bounds[j].cap));
                    let status = if a.iter().any(Option::is_none) {
                        CellStatus::Partial
                    } else if boundary {
                        CellStatus::Boundary
                    } else {
                        CellStatus::Normal
                    };
                    Cell { status, a, b: vec![None; r] }
                }
                None => Cell { status: CellStatus::Breakdown, a: vec![None; r], b: vec![None; r] },
            });
            if let Some((j, l)) = broke {
                lat.breakdowns.push((n, j, l));
            }
        }
        let stage_b: Vec<(MultiIndex, Vec<Option<T>>)> = level
            .par_iter()
            .filter(|n| lat.is_normal(n))
            .map(|n| (n.clone(), fill_b(&lat, marginals, n)))
            .collect();
        for (n, b) in stage_b {
            let i = lat.flat(&n).expect("level index in range");
            lat.cells[i].as_mut().expect("cell filled in stage a").b = b;
        }
    }
    Ok(lat)
}

/// `a_{n,·}` of one cell (`None` when it is not reachable), plus the first
/// failing `(j, k)` when some `a_{n,j}` could not be computed.
#[allow(clippy::type_complexity)]
fn fill_a<T: Scalar>(
    lat: &NnrrLattice<T>,
    marginals: &[JacobiData<T>],
    n: &[usize],
) -> (MultiIndex, Option<Vec<Option<T>>>, Option<(usize, usize)>) {
    let r = n.len();
    let reachable = index_len(n) == 0
        || (0..r).any(|j| minus(n, j).is_some_and(|m| lat.is_normal(&m) && lat.b(&m, j).is_some()));
    if !reachable {
        return (n.to_vec(), None, None);
    }
    let mut out = Vec::with_capacity(r);
    let mut broke = None;
    for j in 0..r {
        let bound = lat.bounds[j];
        if n[j] == 0 || (bound.finite_support && n[j] == bound.cap) {
            out.push(Some(T::zero()));
            continue;
        }
        if (0..r).all(|k| k == j || n[k] == 0) {
            out.push(marginals[j].a.get(n[j]).cloned());
            continue;
        }
        let mut value = None;
        let mut first_fail = None;
        for k in (0..r).filter(|&k| k != j && n[k] > 0) {
            let m = minus(n, k).expect("n_k > 0");
            let Some(prev) = lat.a(&m, j) else { continue };
            // A zero on the marginal itself (block boundary of a direct sum)
            // propagates. Any other interior a_{m,j} = 0 means m + e_j is not
            // normal, b_{m,j} is missing and this k is skipped.
            if prev.is_zero() && marginals[j].a.get(n[j]).is_some_and(Scalar::is_zero) {
                value = Some(T::zero());
                break;
            }
            let mj = minus(&m, j).expect("n_j > 0");
            let (Some(bmj), Some(bmk), Some(bjj), Some(bjk)) = (lat.b(&m, j), lat.b(&m, k), lat.b(&mj, j), lat.b(&mj, k))
            else {
                continue;
            };
            let den = bjj.clone() - bjk.clone();
            if negligible(&den, bjj, bjk) {
                first_fail.get_or_insert((j, k));
                continue;
            }
            value = Some(prev.clone() * (bmj.clone() - bmk.clone()) / den);
            break;
        }
        if value.is_none() && broke.is_none() {
            broke = first_fail.or_else(|| (0..r).find(|&k| k != j && n[k] > 0).map(|k| (j, k)));
        }
        out.push(value);
    }
    (n.to_vec(), Some(out), broke)
}

/// `b_{n,·}` of a normal cell; entries stay `None` where `n + e_j` is out of reach.
fn fill_b<T: Scalar>(lat: &NnrrLattice<T>, marginals: &[JacobiData<T>], n: &[usize]) -> Vec<Option<T>> {
    let r = n.len();
    let sum_a = |m: &[usize]| -> Option<T> {
        lat.cell(m).filter(|c| c.status.is_normal())?.a.iter().try_fold(T::zero(), |acc, v| Some(acc + v.clone()?))
    };
    (0..r)
        .map(|j| {
            let bound = lat.bounds[j];
            if bound.finite_support && n[j] >= bound.cap {
                return None;
            }
            if (0..r).all(|k| k == j || n[k] == 0) {
                return marginals[j].b.get(n[j]).cloned();
            }
            let here = sum_a(n)?;
            for k in (0..r).filter(|&k| k != j && n[k] > 0) {
                let m = minus(n, k).expect("n_k > 0");
                let Some(there) = sum_a(&plus(&m, j)) else { continue };
                let (Some(bmj), Some(bmk)) = (lat.b(&m, j), lat.b(&m, k)) else { continue };
                let den = bmk.clone() - bmj.clone();
                if negligible(&den, bmj, bmk) {
                    continue;
                }
                return Some(bmj.clone() + (here.clone() - there) / den);
            }
            None
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Support;
    use crate::numerics::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn charlier_marginal(a: i64, len: usize) -> JacobiData<Rational> {
        JacobiData::new(
            (0..len).map(|n| q(n as i64 + a)).collect(),
            (0..=len).map(|n| q(n as i64 * a)).collect(),
            q(1),
            Support::Infinite,
        )
        .unwrap()
    }

    #[test]
    fn rank_one_is_the_marginal() {
        let m = charlier_marginal(1, 6);
        let lat = cc_fill(&[m.clone()], &[Bound { cap: 5, finite_support: false }], 5).unwrap();
        for n in 0..=5 {
            assert_eq!(lat.b(&[n], 0), Some(&m.b[n]));
            assert_eq!(lat.a(&[n], 0), Some(&m.a[n]));
        }
    }

    #[test]
    fn charlier_pair_known_values() {
        // Multiple Charlier: b_{n,j} = |n| + a_j, a_{n,j} = n_j a_j.
        let bd = Bound { cap: 6, finite_support: false };
        let lat = cc_fill(&[charlier_marginal(1, 7), charlier_marginal(2, 7)], &[bd, bd], 6).unwrap();
        assert!(lat.breakdowns().is_empty());
        for n in lat.indices() {
            let s = index_len(&n) as i64;
            for (j, aj) in [1i64, 2].iter().enumerate() {
                assert_eq!(lat.a(&n, j), Some(&q(n[j] as i64 * aj)), "a at {n:?}");
                assert_eq!(lat.b(&n, j), Some(&q(s + aj)), "b at {n:?}");
            }
        }
    }

    #[test]
    fn slab_drops_axis() {
        let bd = Bound { cap: 4, finite_support: false };
        let lat = cc_fill(&[charlier_marginal(1, 5), charlier_marginal(2, 5)], &[bd, bd], 4).unwrap();
        let s = lat.slab(1, 1);
        assert_eq!(s.rank(), 1);
        assert_eq!(s.dmax(), 3);
        assert_eq!(s.b(&[2], 0), lat.b(&[2, 1], 0));
    }
}
