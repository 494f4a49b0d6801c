//! Direct moment-matrix computations, independent of the recurrence.

use crate::error::{MopError, Result};
use crate::functionals::MopSystem;
use crate::functionals::MomentFunctional;
use crate::numerics::{index_len, level_set, minus, plus, DenseMatrix, MultiIndex, Poly, Rational, Scalar};

use super::NnrrLattice;

/// `⟨p, x^k⟩_j = Σ_t p_t c^j_{t+k}` for a moment list `c`.
pub fn inner<T: Scalar>(p: &Poly<T>, k: usize, c: &[T]) -> T {
    p.coeffs()
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (t, v)| acc + v.clone() * c[t + k].clone())
}

fn moments<T: Scalar>(sys: &MopSystem<T>, j: usize, count: usize) -> Result<Vec<T>> {
    sys.functionals[j].moments(count)
}

fn check_rank<T: Scalar>(sys: &MopSystem<T>, n: &[usize]) -> Result<()> {
    if n.len() != sys.rank() {
        return Err(MopError::Usage(format!(
            "multi-index {n:?} has {} entries, system has {} functionals",
            n.len(),
            sys.rank()
        )));
    }
    Ok(())
}

/// Exact copy of a float system whose moments are cheap rationals.
///
/// Float oracles route through it so that ill-conditioned moment matrices
/// (Hilbert-like for Jacobi–Piñeiro) do not limit the comparison.
fn rational_shadow<T: Scalar>(sys: &MopSystem<T>, count: usize) -> Option<MopSystem<Rational>> {
    if T::EXACT || !sys.functionals.iter().all(|f| f.has_cheap_rational_shadow()) {
        return None;
    }
    let fs = sys
        .functionals
        .iter()
        .map(|f| MomentFunctional::from_moments(f.rational_moments(count)?).ok())
        .collect::<Option<Vec<_>>>()?;
    MopSystem::new(fs).ok()
}

fn shadow_count(n: &[usize]) -> usize {
    index_len(n) + n.iter().max().copied().unwrap_or(0) + 2
}

/// Stacked moment matrix `M_n`: row `(j, p)` holds `c^j_{p+k}` for `k < |n|`.
fn moment_matrix<T: Scalar>(sys: &MopSystem<T>, n: &[usize], extra_cols: usize) -> Result<DenseMatrix<T>> {
    let size = index_len(n);
    let mut rows = Vec::with_capacity(size);
    for (j, &nj) in n.iter().enumerate() {
        if nj == 0 {
            continue;
        }
        let c = moments(sys, j, nj + size + extra_cols)?;
        for p in 0..nj {
            rows.push((0..size + extra_cols).map(|k| c[p + k].clone()).collect());
        }
    }
    DenseMatrix::from_rows(rows)
}

/// Monic type II polynomial from the stacked moment system.
pub fn type2_oracle<T: Scalar>(sys: &MopSystem<T>, n: &[usize]) -> Result<Poly<T>> {
    check_rank(sys, n)?;
    let size = index_len(n);
    if size == 0 {
        return Ok(Poly::one());
    }
    if let Some(shadow) = rational_shadow(sys, shadow_count(n)) {
        return Ok(type2_oracle(&shadow, n)?.map(T::from_rational));
    }
    let full = moment_matrix(sys, n, 1)?;
    let mut square = DenseMatrix::zeros(size, size);
    let mut rhs = Vec::with_capacity(size);
    for i in 0..size {
        for k in 0..size {
            square.set(i, k, full.get(i, k).clone());
        }
        rhs.push(-full.get(i, size).clone());
    }
    let mut x = square.solve(&rhs).map_err(|e| match e {
        MopError::Singular { .. } => MopError::NonNormal { n: n.to_vec() },
        e => e,
    })?;
    x.push(T::one());
    Ok(Poly::new(x))
}

/// `a_{n,i} = ⟨P_n, x^{n_i}⟩_i / ⟨P_{n-e_i}, x^{n_i-1}⟩_i`, zero when `n_i = 0`.
pub fn oracle_a<T: Scalar>(sys: &MopSystem<T>, n: &[usize], i: usize) -> Result<T> {
    let Some(m) = minus(n, i) else { return Ok(T::zero()) };
    let p = type2_oracle(sys, n)?;
    let pm = type2_oracle(sys, &m)?;
    let c = moments(sys, i, index_len(n) + n[i] + 1)?;
    let den = inner(&pm, n[i] - 1, &c);
    if den.is_zero() {
        return Err(MopError::NonNormal { n: n.to_vec() });
    }
    Ok(inner(&p, n[i], &c) / den)
}

/// `b_{n,j}` by projecting the recurrence on `x^{n_j}` under `⟨·,·⟩_j`.
pub fn oracle_b<T: Scalar>(sys: &MopSystem<T>, n: &[usize], j: usize) -> Result<T> {
    let p = type2_oracle(sys, n)?;
    let c = moments(sys, j, index_len(n) + n[j] + 2)?;
    let den = inner(&p, n[j], &c);
    if den.is_zero() {
        return Err(MopError::NonNormal { n: plus(n, j) });
    }
    let mut num = inner(&p.mul_x(), n[j], &c);
    for (i, _) in n.iter().enumerate().filter(|(_, &ni)| ni > 0) {
        let a = oracle_a(sys, n, i)?;
        if a.is_zero() {
            continue;
        }
        let pm = type2_oracle(sys, &minus(n, i).expect("n_i > 0"))?;
        num = num - a * inner(&pm, n[j], &c);
    }
    Ok(num / den)
}

/// Type I vector `(A^{(1)}, …, A^{(r)})` with `deg A^{(j)} ≤ n_j - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeIVector<T> {
    pub n: MultiIndex,
    pub polys: Vec<Poly<T>>,
    /// `Σ_j ⟨A^{(j)}, x^{|n|-1}⟩_j = 1` holds by construction.
    pub normalized: bool,
}

impl<T: Scalar> TypeIVector<T> {
    pub fn zero(r: usize) -> Self {
        TypeIVector { n: vec![0; r], polys: vec![Poly::zero(); r], normalized: false }
    }

    pub fn scale(&self, s: &T) -> Self {
        TypeIVector {
            n: self.n.clone(),
            polys: self.polys.iter().map(|p| p.scale(s)).collect(),
            normalized: false,
        }
    }

    /// Componentwise `self + s * o`.
    pub fn axpy(&self, s: &T, o: &Self) -> Self {
        TypeIVector {
            n: self.n.clone(),
            polys: self.polys.iter().zip(&o.polys).map(|(p, q)| p.clone() + q.scale(s)).collect(),
            normalized: false,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.polys.iter().map(Poly::max_abs).fold(0.0, f64::max)
    }

    /// `Σ_j ⟨A^{(j)}, x^k⟩_j`.
    pub fn pairing(&self, sys: &MopSystem<T>, k: usize) -> Result<T> {
        let mut acc = T::zero();
        for (j, p) in self.polys.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let c = moments(sys, j, p.coeffs().len() + k)?;
            acc = acc + inner(p, k, &c);
        }
        Ok(acc)
    }
}

/// Solves the type I system with the normalization against `x^{|n|-1}`.
pub fn type1_solve<T: Scalar>(sys: &MopSystem<T>, n: &[usize]) -> Result<TypeIVector<T>> {
    check_rank(sys, n)?;
    let size = index_len(n);
    if size == 0 {
        return Ok(TypeIVector::zero(n.len()));
    }
    if let Some(shadow) = rational_shadow(sys, shadow_count(n)) {
        let v = type1_solve(&shadow, n)?;
        return Ok(TypeIVector {
            n: v.n,
            polys: v.polys.iter().map(|p| p.map(T::from_rational)).collect(),
            normalized: true,
        });
    }
    // Transposed stacked matrix: equation p, unknown (j, t) → c^j_{t+p}.
    let m = moment_matrix(sys, n, 0)?.transpose();
    let mut rhs = vec![T::zero(); size];
    rhs[size - 1] = T::one();
    let x = m.solve(&rhs).map_err(|e| match e {
        MopError::Singular { .. } => MopError::NonNormal { n: n.to_vec() },
        e => e,
    })?;
    let mut polys = Vec::with_capacity(n.len());
    let mut at = 0;
    for &nj in n {
        polys.push(Poly::new(x[at..at + nj].to_vec()));
        at += nj;
    }
    Ok(TypeIVector { n: n.to_vec(), polys, normalized: true })
}

/// Normality verdict: `det M_n ≠ 0`, with a conditioning caveat on floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Normality {
    pub normal: bool,
    pub ill_conditioned: bool,
}

pub fn normality<T: Scalar>(sys: &MopSystem<T>, n: &[usize]) -> Result<Normality> {
    check_rank(sys, n)?;
    if index_len(n) == 0 {
        return Ok(Normality { normal: true, ill_conditioned: false });
    }
    if let Some(shadow) = rational_shadow(sys, shadow_count(n)) {
        return normality(&shadow, n);
    }
    let det = moment_matrix(sys, n, 0)?.determinant()?;
    Ok(Normality { normal: !det.value.is_zero(), ill_conditioned: det.ill_conditioned })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PerfectnessReport {
    pub dmax: usize,
    pub checked: usize,
    /// Indices with `det M_n = 0`, in scan order.
    pub non_normal: Vec<MultiIndex>,
    /// Indices whose verdict came from an ill-conditioned float determinant.
    pub ill_conditioned: Vec<MultiIndex>,
    /// `(n, j, l)` with `δ_{n,j,l} = 0` in the lattice.
    pub zero_deltas: Vec<(MultiIndex, usize, usize)>,
    /// `(n, j, l)` where `δ_{n,j,l} ≠ 0` disagrees with normality of `n + e_j + e_l`.
    pub delta_mismatches: Vec<(MultiIndex, usize, usize)>,
}

impl PerfectnessReport {
    pub fn perfect(&self) -> bool {
        self.non_normal.is_empty()
    }
}

/// Normality of every `|n| ≤ dmax` with `n_j ≤ N_j`, and the `δ` criterion on the lattice.
pub fn perfectness_scan<T: Scalar>(
    sys: &MopSystem<T>,
    lat: &NnrrLattice<T>,
    dmax: usize,
) -> Result<PerfectnessReport> {
    let r = sys.rank();
    let caps: Vec<usize> = sys.nvec().iter().map(|c| c.unwrap_or(dmax).min(dmax)).collect();
    let mut report = PerfectnessReport {
        dmax,
        checked: 0,
        non_normal: Vec::new(),
        ill_conditioned: Vec::new(),
        zero_deltas: Vec::new(),
        delta_mismatches: Vec::new(),
    };
    let mut normal = std::collections::BTreeMap::new();
    for d in 0..=dmax {
        for n in level_set(r, d, &caps) {
            let v = normality(sys, &n)?;
            report.checked += 1;
            if !v.normal {
                report.non_normal.push(n.clone());
            }
            if v.ill_conditioned {
                report.ill_conditioned.push(n.clone());
            }
            normal.insert(n, v.normal);
        }
    }
    for d in 0..=dmax.saturating_sub(2) {
        for n in level_set(r, d, &caps) {
            for j in 0..r {
                for l in j + 1..r {
                    let (Some(bj), Some(bl)) = (lat.b(&n, j), lat.b(&n, l)) else { continue };
                    let zero = (bl.clone() - bj.clone()).is_negligible(
                        bj.abs_f64().max(bl.abs_f64()).max(1.0),
                        crate::numerics::tol::EPS_BREAKDOWN,
                    );
                    if zero {
                        report.zero_deltas.push((n.clone(), j, l));
                    }
                    let mut up = n.clone();
                    up[j] += 1;
                    up[l] += 1;
                    if let Some(&nn) = normal.get(&up) {
                        if nn == zero {
                            report.delta_mismatches.push((n.clone(), j, l));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FamilySpec;
    use crate::numerics::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn charlier() -> MopSystem<Rational> {
        MopSystem::from_family(FamilySpec::Charlier { a: vec![q(1), q(2)] }).unwrap()
    }

    /// Cofactor expansion along the first row.
    fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
        if m.len() == 1 {
            return m[0][0].clone();
        }
        (0..m.len()).fold(q(0), |acc, c| {
            let minor: Vec<Vec<Rational>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| v.clone()).collect()).collect();
            let term = m[0][c].clone() * cofactor_det(&minor);
            if c % 2 == 0 { acc + term } else { acc - term }
        })
    }

    #[test]
    fn det_of_m11_matches_cofactor_expansion() {
        let sys = charlier();
        let m = moment_matrix(&sys, &[1, 1], 0).unwrap();
        let rows: Vec<Vec<Rational>> = (0..2).map(|i| (0..2).map(|k| m.get(i, k).clone()).collect()).collect();
        let det = m.determinant().unwrap().value;
        assert_eq!(det, cofactor_det(&rows));
        assert_ne!(det, q(0));
    }

    #[test]
    fn oracle_type2_basics() {
        let sys = charlier();
        assert_eq!(type2_oracle(&sys, &[0, 0]).unwrap(), Poly::one());
        // P_{e_1} = x - b_0 = x - 1
        assert_eq!(type2_oracle(&sys, &[1, 0]).unwrap(), Poly::new(vec![q(-1), q(1)]));
        // multiple Charlier recurrence: a_{n,j} = n_j a_j, b_{n,j} = |n| + a_j
        assert_eq!(oracle_a(&sys, &[2, 1], 1).unwrap(), q(2));
        assert_eq!(oracle_a(&sys, &[2, 1], 0).unwrap(), q(2));
        assert_eq!(oracle_b(&sys, &[2, 1], 1).unwrap(), q(5));
        assert_eq!(oracle_b(&sys, &[2, 1], 0).unwrap(), q(4));
    }

    #[test]
    fn beyond_support_is_singular() {
        let sys = MopSystem::new(vec![crate::functionals::MomentFunctional::point_masses(vec![q(1), q(2)], vec![q(1), q(1)]).unwrap()])
            .unwrap();
        assert!(matches!(type2_oracle(&sys, &[3]), Err(MopError::NonNormal { .. })));
        assert!(!normality(&sys, &[3]).unwrap().normal);
        assert!(normality(&sys, &[2]).unwrap().normal);
    }

    #[test]
    fn type1_unit_index() {
        let sys = charlier();
        let t = type1_solve(&sys, &[0, 1]).unwrap();
        assert!(t.polys[0].is_zero());
        assert_eq!(t.polys[1], Poly::constant(q(1)));
        assert_eq!(type1_solve(&sys, &[0, 0]).unwrap(), TypeIVector::zero(2));
        let t = type1_solve(&sys, &[2, 1]).unwrap();
        assert_eq!(t.pairing(&sys, 2).unwrap(), q(1));
        assert_eq!(t.pairing(&sys, 0).unwrap(), q(0));
        assert_eq!(t.pairing(&sys, 1).unwrap(), q(0));
    }
}
