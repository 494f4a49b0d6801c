use std::collections::BTreeMap;

use crate::error::{MopError, Result};
use crate::functionals::MopSystem;
use crate::numerics::{index_len, minus, plus, MultiIndex, Poly, Scalar};

use super::oracle::{type1_solve, TypeIVector};
use super::NnrrLattice;

/// Type II polynomials generated from a lattice by the nearest-neighbour recurrence.
#[derive(Debug, Clone)]
pub struct Type2Table<T> {
    polys: BTreeMap<MultiIndex, Poly<T>>,
}

impl<T: Scalar> Type2Table<T> {
    /// `P_m` for every normal `m` of the lattice (or every `m ≤ limit`).
    ///
    /// `P_m = (x - b_{p,j}) P_p - Σ_i a_{p,i} P_{p-e_i}` with `p = m - e_j` and
    /// `j` the smallest axis for which the data is available.
    pub fn build(lat: &NnrrLattice<T>, limit: Option<&[usize]>) -> Self {
        let r = lat.rank();
        let mut polys: BTreeMap<MultiIndex, Poly<T>> = BTreeMap::new();
        for m in lat.indices() {
            if limit.is_some_and(|lim| m.iter().zip(lim).any(|(a, b)| a > b)) || !lat.is_normal(&m) {
                continue;
            }
            if index_len(&m) == 0 {
                polys.insert(m, Poly::one());
                continue;
            }
            let built = (0..r).find_map(|j| {
                let p = minus(&m, j)?;
                let pp = polys.get(&p)?;
                let b = lat.b(&p, j)?;
                let mut out = pp.mul_linear(b);
                for i in 0..r {
                    let a = lat.a(&p, i)?;
                    if a.is_zero() {
                        continue;
                    }
                    out = out - polys.get(&minus(&p, i)?)?.scale(a);
                }
                Some(out)
            });
            if let Some(poly) = built {
                polys.insert(m, poly);
            }
        }
        Type2Table { polys }
    }

    /// Table from explicitly given polynomials.
    pub fn from_polys(polys: BTreeMap<MultiIndex, Poly<T>>) -> Self {
        Type2Table { polys }
    }

    pub fn get(&self, n: &[usize]) -> Option<&Poly<T>> {
        self.polys.get(n)
    }

    pub fn require(&self, n: &[usize]) -> Result<&Poly<T>> {
        self.get(n).ok_or_else(|| MopError::NonNormal { n: n.to_vec() })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Poly<T>)> {
        self.polys.iter()
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }
}

/// Monic `P_n` from the lattice.
pub fn type2_coeffs<T: Scalar>(lat: &NnrrLattice<T>, n: &[usize]) -> Result<Poly<T>> {
    if !lat.contains(n) {
        return Err(MopError::Usage(format!("{n:?} lies outside the lattice")));
    }
    lat.require_normal(n)?;
    Type2Table::build(lat, Some(n)).require(n).cloned()
}

/// `P_{n+e_l} - P_{n+e_j} - (b_{n,j} - b_{n,l}) P_n`, max coefficient.
pub fn nnr_cor_residual<T: Scalar>(
    table: &Type2Table<T>,
    lat: &NnrrLattice<T>,
    n: &[usize],
    j: usize,
    l: usize,
) -> Result<f64> {
    let bj = lat.b(n, j).ok_or_else(|| MopError::NonNormal { n: plus(n, j) })?;
    let bl = lat.b(n, l).ok_or_else(|| MopError::NonNormal { n: plus(n, l) })?;
    let lhs = table.require(&plus(n, l))?.clone() - table.require(&plus(n, j))?.clone();
    Ok(lhs.distance(&table.require(n)?.scale(&(bj.clone() - bl.clone()))))
}

fn lookup<'a, T: Scalar>(
    cache: &'a mut BTreeMap<MultiIndex, TypeIVector<T>>,
    sys: &MopSystem<T>,
    n: &[usize],
) -> Result<&'a TypeIVector<T>> {
    if !cache.contains_key(n) {
        cache.insert(n.to_vec(), type1_solve(sys, n)?);
    }
    Ok(&cache[n])
}

/// Type I recurrence residual
/// `x A_n - A_{n-e_j} - b_{n-e_j,j} A_n - Σ_i a_{n,i} A_{n+e_i}`, max
/// coefficient relative to the largest term (and at least 1).
pub fn type1_residual<T: Scalar>(sys: &MopSystem<T>, lat: &NnrrLattice<T>, n: &[usize], j: usize) -> Result<f64> {
    let mut cache = BTreeMap::new();
    type1_residual_cached(&mut cache, sys, lat, n, j)
}

pub(crate) fn type1_residual_cached<T: Scalar>(
    cache: &mut BTreeMap<MultiIndex, TypeIVector<T>>,
    sys: &MopSystem<T>,
    lat: &NnrrLattice<T>,
    n: &[usize],
    j: usize,
) -> Result<f64> {
    let m = minus(n, j).ok_or_else(|| MopError::Usage(format!("{n:?} has no predecessor along axis {j}")))?;
    let b = lat.b(&m, j).ok_or_else(|| MopError::NonNormal { n: n.to_vec() })?.clone();
    let an = lookup(cache, sys, n)?.clone();
    let am = lookup(cache, sys, &m)?.clone();
    let mut res: Vec<Poly<T>> =
        an.polys.iter().zip(&am.polys).map(|(p, q)| p.mul_x() - q.clone() - p.scale(&b)).collect();
    let mut scale = an.max_abs().max(am.max_abs()).max(an.max_abs() * b.abs_f64()).max(1.0);
    for i in 0..n.len() {
        let a = lat.a(n, i).ok_or_else(|| MopError::NonNormal { n: n.to_vec() })?;
        if a.is_zero() {
            continue;
        }
        let up = lookup(cache, sys, &plus(n, i))?;
        scale = scale.max(up.max_abs() * a.abs_f64());
        for (r, p) in res.iter_mut().zip(&up.polys) {
            *r = r.clone() - p.scale(a);
        }
    }
    Ok(res.iter().map(Poly::max_abs).fold(0.0, f64::max) / scale)
}

/// `A_{n-e_l} - A_{n-e_j} - (b_{n-e_j,j} - b_{n-e_l,l}) A_n`, max coefficient.
pub fn type1_cor_residual<T: Scalar>(
    sys: &MopSystem<T>,
    lat: &NnrrLattice<T>,
    n: &[usize],
    j: usize,
    l: usize,
) -> Result<f64> {
    let mj = minus(n, j).ok_or_else(|| MopError::Usage(format!("{n:?} has n_{j} = 0")))?;
    let ml = minus(n, l).ok_or_else(|| MopError::Usage(format!("{n:?} has n_{l} = 0")))?;
    let bj = lat.b(&mj, j).ok_or_else(|| MopError::NonNormal { n: n.to_vec() })?;
    let bl = lat.b(&ml, l).ok_or_else(|| MopError::NonNormal { n: n.to_vec() })?;
    let an = type1_solve(sys, n)?;
    let diff = type1_solve(sys, &ml)?.axpy(&-T::one(), &type1_solve(sys, &mj)?);
    Ok(diff.axpy(&-(bj.clone() - bl.clone()), &an).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FamilySpec;
    use crate::lattice::{lattice_for_system, type2_oracle};
    use crate::numerics::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn charlier_type2_matches_oracle() {
        let sys = MopSystem::from_family(FamilySpec::Charlier { a: vec![q(1), q(2)] }).unwrap();
        let lat = lattice_for_system(&sys, 5).unwrap();
        assert_eq!(type2_coeffs(&lat, &[0, 0]).unwrap(), Poly::one());
        assert_eq!(type2_coeffs(&lat, &[0, 1]).unwrap(), Poly::new(vec![q(-2), q(1)]));
        let table = Type2Table::build(&lat, None);
        for (n, p) in table.iter() {
            assert_eq!(p, &type2_oracle(&sys, n).unwrap(), "P at {n:?}");
        }
        assert_eq!(nnr_cor_residual(&table, &lat, &[1, 1], 0, 1).unwrap(), 0.0);
        assert_eq!(type1_residual(&sys, &lat, &[1, 1], 1).unwrap(), 0.0);
        assert_eq!(type1_cor_residual(&sys, &lat, &[2, 1], 0, 1).unwrap(), 0.0);
    }
}
