use crate::numerics::{minus, plus, MultiIndex, Scalar};

use super::NnrrLattice;

/// Largest residual of each compatibility equation over the lattice.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualReport {
    /// Max absolute residual of CC1, CC2, CC3.
    pub max: [f64; 3],
    /// Where each maximum occurs: `(n, j, l)`.
    pub argmax: [Option<(MultiIndex, usize, usize)>; 3],
    /// Number of `(n, j, l)` checks performed for each equation.
    pub checked: [usize; 3],
    /// On the exact backend: every residual was exactly zero.
    pub exact_zero: bool,
}

impl ResidualReport {
    pub fn worst(&self) -> f64 {
        self.max.iter().cloned().fold(0.0, f64::max)
    }
}

/// Evaluates
/// `b_{n+e_l,j} - b_{n+e_j,l} = b_{n,j} - b_{n,l}`,
/// `b_{n,l} b_{n+e_l,j} - b_{n,j} b_{n+e_j,l} = Σ_i a_{n+e_l,i} - Σ_i a_{n+e_j,i}` and
/// `a_{n+e_l,j} (b_{n-e_j,j} - b_{n-e_j,l}) = a_{n,j} (b_{n,j} - b_{n,l})`
/// at every `(n, j ≠ l)` where all terms are stored.
pub fn cc_residuals<T: Scalar>(lat: &NnrrLattice<T>) -> ResidualReport {
    let r = lat.rank();
    let mut rep = ResidualReport { max: [0.0; 3], argmax: [None, None, None], checked: [0; 3], exact_zero: T::EXACT };
    let mut record = |eq: usize, v: T, n: &MultiIndex, j: usize, l: usize| {
        rep.checked[eq] += 1;
        if !v.is_zero() {
            rep.exact_zero = false;
        }
        let m = v.abs_f64();
        if m > rep.max[eq] || (rep.argmax[eq].is_none() && !v.is_zero()) {
            rep.max[eq] = m;
            rep.argmax[eq] = Some((n.clone(), j, l));
        }
    };
    let sum_a = |m: &[usize]| lat.a_all(m).map(|v| v.into_iter().fold(T::zero(), |acc, x| acc + x));
    for n in lat.indices() {
        for j in 0..r {
            for l in 0..r {
                if j == l {
                    continue;
                }
                let (nl, nj) = (plus(&n, l), plus(&n, j));
                let (bnj, bnl) = (lat.b(&n, j), lat.b(&n, l));
                let (blj, bjl) = (lat.b(&nl, j), lat.b(&nj, l));
                if let (Some(bnj), Some(bnl), Some(blj), Some(bjl)) = (bnj, bnl, blj, bjl) {
                    let cc1 = blj.clone() - bjl.clone() - (bnj.clone() - bnl.clone());
                    record(0, cc1, &n, j, l);
                    if let (Some(sl), Some(sj)) = (sum_a(&nl), sum_a(&nj)) {
                        let cc2 = bnl.clone() * blj.clone() - bnj.clone() * bjl.clone() - (sl - sj);
                        record(1, cc2, &n, j, l);
                    }
                }
                if let Some(mj) = minus(&n, j) {
                    let terms = (lat.a(&nl, j), lat.b(&mj, j), lat.b(&mj, l), lat.a(&n, j), bnj, bnl);
                    if let (Some(alj), Some(bmj), Some(bml), Some(anj), Some(bnj), Some(bnl)) = terms {
                        let cc3 = alj.clone() * (bmj.clone() - bml.clone()) - anj.clone() * (bnj.clone() - bnl.clone());
                        record(2, cc3, &n, j, l);
                    }
                }
            }
        }
    }
    rep
}
