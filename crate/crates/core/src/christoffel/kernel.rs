use crate::error::Result;
use crate::functionals::MopSystem;
use crate::lattice::{cd_kernel, type1_solve, NnrrLattice, Type2Table};
use crate::numerics::{index_len, minus, plus, Poly, Scalar};

use super::det::transform_type2_onestep;

/// Residuals of the two kernel identities of the one-step transform, relative
/// to the largest term of each identity (and at least 1).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelIdentities {
    /// `K_k(z_0, x) + P_k(z_0) Â_k(x)`.
    pub christoffel: f64,
    /// `P_k(z_0) K_k(x, z_0) - Σ_j a_{k,j} P_{k-e_j}(z_0) A_{k+e_j}(z_0) P̂_{k-e_j}(x)`.
    pub type2: f64,
}

impl KernelIdentities {
    pub fn worst(&self) -> f64 {
        self.christoffel.max(self.type2)
    }
}

/// Both kernel identities at `k` for `Φ = x - z_0`.
///
/// `Â_k` comes from the moment solve on `(x - z_0)ν`, `P̂_{k-e_j}` from the
/// one-step formula, and `K_k` from the step-line path.
pub fn kernel_identities<T: Scalar>(
    sys: &MopSystem<T>,
    lat: &NnrrLattice<T>,
    table: &Type2Table<T>,
    k: &[usize],
    z0: &T,
) -> Result<KernelIdentities> {
    let r = sys.rank();
    if index_len(k) == 0 {
        return Ok(KernelIdentities { christoffel: 0.0, type2: 0.0 });
    }
    let kernel = cd_kernel(table, sys, k, None)?;
    let pk = table.require(k)?.eval(z0);

    let hat = type1_solve(&sys.modified(&Poly::linear(z0.clone()))?, k)?;
    let christoffel = kernel
        .at_x(z0)
        .iter()
        .zip(&hat.polys)
        .map(|(kz, a)| {
            let ta = a.scale(&pk);
            (kz.clone() + ta.clone()).max_abs() / kz.max_abs().max(ta.max_abs()).max(1.0)
        })
        .fold(0.0, f64::max);

    let mut rhs = vec![Poly::zero(); r];
    let mut scale = vec![1.0f64; r];
    for j in 0..r {
        let Some(a) = lat.a(k, j) else { continue };
        if a.is_zero() {
            continue;
        }
        let down = minus(k, j).expect("a_{k,j} ≠ 0 needs k_j > 0");
        let p_down = table.require(&down)?.eval(z0);
        let up = type1_solve(sys, &plus(k, j))?;
        let p_hat = transform_type2_onestep(table, &down, j, z0)?;
        for (i, slot) in rhs.iter_mut().enumerate() {
            let c = a.clone() * p_down.clone() * up.polys[i].eval(z0);
            let term = p_hat.scale(&c);
            scale[i] = scale[i].max(term.max_abs());
            *slot = slot.clone() + term;
        }
    }
    let type2 = kernel
        .at_y(z0)
        .iter()
        .zip(&rhs)
        .zip(&scale)
        .map(|((kx, rh), s)| {
            let lhs = kx.scale(&pk);
            lhs.distance(rh) / lhs.max_abs().max(*s)
        })
        .fold(0.0, f64::max);
    Ok(KernelIdentities { christoffel, type2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FamilySpec;
    use crate::lattice::lattice_for_system;
    use crate::numerics::Rational;

    #[test]
    fn charlier_identities_exact() {
        let q = |v: i64| Rational::from_i64(v);
        let sys = MopSystem::from_family(FamilySpec::Charlier { a: vec![q(1), q(2)] }).unwrap();
        let lat = lattice_for_system(&sys, 7).unwrap();
        let table = Type2Table::build(&lat, None);
        for k in [[0, 0], [1, 0], [2, 1], [2, 2]] {
            let rep = kernel_identities(&sys, &lat, &table, &k, &q(-1)).unwrap();
            assert_eq!(rep.worst(), 0.0, "at {k:?}");
        }
    }
}
