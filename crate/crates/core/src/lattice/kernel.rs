use crate::error::{MopError, Result};
use crate::functionals::MopSystem;
use crate::numerics::{index_len, minus, plus, step_line_axes, BiPoly, MultiIndex, Poly, Scalar};

use super::oracle::type1_solve;
use super::polys::Type2Table;
use super::NnrrLattice;

/// `K_n(x, y) = Σ_k P_{n_k}(x) A_{n_{k+1}}(y)` along a path `0 = n_0 → … → n_N = n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdKernel<T> {
    pub n: MultiIndex,
    /// Axis added at each step of the path.
    pub path: Vec<usize>,
    /// One bivariate polynomial per component.
    pub components: Vec<BiPoly<T>>,
}

impl<T: Scalar> CdKernel<T> {
    /// Component polynomials in `x` at fixed `y`.
    pub fn at_y(&self, y: &T) -> Vec<Poly<T>> {
        self.components.iter().map(|k| k.at_y(y)).collect()
    }

    /// Component polynomials in `y` at fixed `x`.
    pub fn at_x(&self, x: &T) -> Vec<Poly<T>> {
        self.components.iter().map(|k| k.at_x(x)).collect()
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.components.iter().zip(&o.components).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }
}

/// Christoffel–Darboux kernel along `path` (default: the step-line).
pub fn cd_kernel<T: Scalar>(
    table: &Type2Table<T>,
    sys: &MopSystem<T>,
    n: &[usize],
    path: Option<&[usize]>,
) -> Result<CdKernel<T>> {
    let r = sys.rank();
    let path: Vec<usize> = match path {
        Some(p) => p.to_vec(),
        None => step_line_axes(n),
    };
    let mut end = vec![0; r];
    for &j in &path {
        if j >= r {
            return Err(MopError::Usage(format!("path axis {j} out of range")));
        }
        end[j] += 1;
    }
    if end != n {
        return Err(MopError::Usage(format!("path does not end at {n:?}")));
    }
    let mut components = vec![BiPoly::zero(); r];
    let mut cur = vec![0; r];
    for &j in &path {
        let p = table.require(&cur)?.clone();
        cur[j] += 1;
        let a = type1_solve(sys, &cur)?;
        for (k, ai) in components.iter_mut().zip(&a.polys) {
            k.add_assign(&BiPoly::outer(&p, ai), &T::one());
        }
    }
    Ok(CdKernel { n: n.to_vec(), path, components })
}

/// `(x - y) K_n - [P_n(x) A_n(y) - Σ_j a_{n,j} P_{n-e_j}(x) A_{n+e_j}(y)]`, max
/// coefficient relative to the largest term (and at least 1).
pub fn cd_residual<T: Scalar>(
    kernel: &CdKernel<T>,
    table: &Type2Table<T>,
    lat: &NnrrLattice<T>,
    sys: &MopSystem<T>,
) -> Result<f64> {
    let n = &kernel.n;
    let r = n.len();
    if index_len(n) == 0 {
        return Ok(kernel.components.iter().map(BiPoly::max_abs).fold(0.0, f64::max));
    }
    let pn = table.require(n)?;
    let an = type1_solve(sys, n)?;
    let mut worst = 0.0f64;
    let ups = (0..r)
        .map(|j| {
            let a = lat.a(n, j).ok_or_else(|| MopError::NonNormal { n: n.clone() })?;
            if a.is_zero() {
                return Ok(None);
            }
            let pm = table.require(&minus(n, j).expect("a_{n,j} ≠ 0 needs n_j > 0"))?.clone();
            Ok(Some((a.clone(), pm, type1_solve(sys, &plus(n, j))?)))
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 0..r {
        let mut rhs = BiPoly::outer(pn, &an.polys[i]);
        let lhs = kernel.components[i].mul_x_minus_y();
        let mut scale = lhs.max_abs().max(rhs.max_abs()).max(1.0);
        for (a, pm, up) in ups.iter().flatten() {
            let term = BiPoly::outer(pm, &up.polys[i]);
            scale = scale.max(term.max_abs() * a.abs_f64());
            rhs.add_assign(&term, &-a.clone());
        }
        worst = worst.max(lhs.distance(&rhs) / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FamilySpec;
    use crate::lattice::lattice_for_system;
    use crate::numerics::Rational;

    #[test]
    fn charlier_kernel_identities() {
        let q = |v: i64| Rational::from_i64(v);
        let sys = MopSystem::from_family(FamilySpec::Charlier { a: vec![q(1), q(2)] }).unwrap();
        let lat = lattice_for_system(&sys, 6).unwrap();
        let table = Type2Table::build(&lat, None);
        let k1 = cd_kernel(&table, &sys, &[1, 0], None).unwrap();
        assert_eq!(k1.at_y(&q(3))[0], Poly::constant(q(1)));
        let k = cd_kernel(&table, &sys, &[2, 2], None).unwrap();
        assert_eq!(cd_residual(&k, &table, &lat, &sys).unwrap(), 0.0);
        let other = cd_kernel(&table, &sys, &[2, 2], Some(&[1, 1, 0, 0])).unwrap();
        assert_eq!(k.distance(&other), 0.0);
    }
}
