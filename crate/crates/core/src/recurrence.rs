//! Single-functional machinery: Jacobi coefficients, the three-term
//! recurrence, Favard-direction moments, the Galant one-step Christoffel
//! recursion and kernel polynomials.

use crate::error::{MopError, Result};
use crate::functionals::{MomentFunctional, Support};
use crate::numerics::tol::EPS_BREAKDOWN;
use crate::numerics::{Poly, Rational, Scalar};

/// Monic Jacobi data `x P_n = P_{n+1} + b_n P_n + a_n P_{n-1}`.
///
/// `b` holds `b_0..b_{L-1}` and `a` holds `a_0..a_L` with `a_0 = 0`, so
/// `a.len() == b.len() + 1` always. With finite support `N` the data is
/// complete at `L = N` and the trailing `a_N` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiData<T> {
    pub b: Vec<T>,
    pub a: Vec<T>,
    /// `μ[1]`, needed for norms `⟨P_n, P_n⟩ = c_0 a_1 ⋯ a_n`.
    pub c0: T,
    pub support: Support,
}

impl<T: Scalar> JacobiData<T> {
    pub fn new(b: Vec<T>, mut a: Vec<T>, c0: T, support: Support) -> Result<Self> {
        if a.len() == b.len() && matches!(support, Support::Finite(n) if n == b.len()) {
            a.push(T::zero());
        }
        if a.len() != b.len() + 1 {
            return Err(MopError::Usage(format!(
                "Jacobi data needs len(a) = len(b) + 1 (got {} and {})",
                a.len(),
                b.len()
            )));
        }
        if !a[0].is_zero() {
            return Err(MopError::Usage("a_0 must be zero".into()));
        }
        if c0.is_zero() {
            return Err(MopError::Domain("c_0 must be nonzero".into()));
        }
        Ok(JacobiData { b, a, c0, support })
    }

    /// Number of `b` coefficients available.
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Keeps `b_0..b_{len-1}` and `a_0..a_len`.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.b.len());
        JacobiData {
            b: self.b[..len].to_vec(),
            a: self.a[..=len].to_vec(),
            c0: self.c0.clone(),
            support: self.support,
        }
    }

    /// `⟨P_n, P_n⟩`.
    pub fn norm(&self, n: usize) -> T {
        self.a[1..=n].iter().fold(self.c0.clone(), |acc, a| acc * a.clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> JacobiData<U> {
        JacobiData {
            b: self.b.iter().map(&f).collect(),
            a: self.a.iter().map(&f).collect(),
            c0: f(&self.c0),
            support: self.support,
        }
    }
}

/// Jacobi data from moments by the Chebyshev algorithm on mixed moments
/// `σ_{k,l} = μ[P_k x^l]`.
///
/// Produces `b_0..b_{L-1}` and `a_1..a_L` from `c_0..c_{2L}`. A vanishing
/// `σ_{N,N}` with `σ_{N,l} = 0` for all available `l` means the functional
/// lies in `L_N`; the data then stops at `N`.
pub fn jacobi_from_moments<T: Scalar>(f: &MomentFunctional<T>, len: usize) -> Result<JacobiData<T>> {
    if len == 0 {
        return Err(MopError::Usage("L must be at least 1".into()));
    }
    let count = match f.support() {
        Support::Finite(n) if n < len => 2 * n + 2,
        _ => 2 * len + 1,
    };
    let c = f.moments(count)?;
    jacobi_from_moment_slice(&c, len)
}

/// [`jacobi_from_moments`] on an explicit moment list.
pub fn jacobi_from_moment_slice<T: Scalar>(c: &[T], len: usize) -> Result<JacobiData<T>> {
    let top = c.len().saturating_sub(1);
    if c.is_empty() || c[0].is_zero() {
        return Err(MopError::Domain("moment c_0 must be nonzero".into()));
    }
    let mut b: Vec<T> = Vec::with_capacity(len);
    let mut a: Vec<T> = vec![T::zero()];
    // sigma_prev = σ_{k-2,·}, sigma = σ_{k-1,·}; both indexed by l.
    let mut sigma_prev: Vec<T> = vec![T::zero(); top + 1];
    let mut sigma: Vec<T> = c.to_vec();
    b.push(c.get(1).cloned().ok_or_else(too_few)? / c[0].clone());
    for k in 1..=len {
        if 2 * k > top {
            if k == len + 1 {
                break;
            }
            return Err(too_few());
        }
        let bk = b[k - 1].clone();
        let ak = a[k - 1].clone();
        let mut next = vec![T::zero(); top + 1];
        let mut scale = 0.0f64;
        for l in k..=top - k {
            let t1 = sigma[l + 1].clone();
            let t2 = bk.clone() * sigma[l].clone();
            let t3 = ak.clone() * sigma_prev[l].clone();
            if !T::EXACT {
                scale = scale.max(t1.abs_f64()).max(t2.abs_f64()).max(t3.abs_f64());
            }
            next[l] = t1 - t2 - t3;
        }
        if next[k].is_negligible(scale, EPS_BREAKDOWN) {
            let annihilated = (k..=top - k).all(|l| next[l].is_negligible(scale, EPS_BREAKDOWN));
            if annihilated {
                a.push(T::zero());
                return Ok(JacobiData { b, a, c0: c[0].clone(), support: Support::Finite(k) });
            }
            return Err(MopError::QuasiDefiniteViolation { n: k + 1 });
        }
        a.push(next[k].clone() / sigma[k - 1].clone());
        if k == len {
            break;
        }
        if k + 1 > top - k {
            return Err(too_few());
        }
        b.push(next[k + 1].clone() / next[k].clone() - sigma[k].clone() / sigma[k - 1].clone());
        sigma_prev = std::mem::replace(&mut sigma, next);
    }
    Ok(JacobiData { b, a, c0: c[0].clone(), support: Support::Infinite })
}

fn too_few() -> MopError {
    MopError::Usage("not enough moments for the requested number of recurrence coefficients".into())
}

/// Jacobi data of a component functional by the most accurate route available:
/// an exact rational shadow, then a discretized Stieltjes procedure, then the
/// Chebyshev algorithm in the working backend.
pub fn marginal_jacobi<T: Scalar>(f: &MomentFunctional<T>, len: usize) -> Result<JacobiData<T>> {
    if T::EXACT {
        return jacobi_from_moments(f, len);
    }
    if f.has_cheap_rational_shadow() {
        let count = match f.support() {
            Support::Finite(n) if n < len => 2 * n + 2,
            _ => 2 * len + 1,
        };
        if let Some(c) = f.rational_moments(count) {
            let exact = jacobi_from_moment_slice::<Rational>(&c, len)?;
            return Ok(exact.map(T::from_rational));
        }
    }
    if let Some(d) = f.discretization() {
        let (b, a) = crate::functionals::quadrature::stieltjes(&d, len + 1);
        if b.len() < len + 1 {
            return Err(MopError::QuasiDefiniteViolation { n: b.len() + 1 });
        }
        let lift = |v: f64| T::from_f64(v).expect("float backends embed f64");
        let c0: f64 = d.weights.iter().sum();
        return JacobiData::new(
            b[..len].iter().map(|v| lift(*v)).collect(),
            a[..=len].iter().map(|v| lift(*v)).collect(),
            lift(c0),
            Support::Infinite,
        );
    }
    jacobi_from_moments(f, len)
}

/// `c_n = c_0 (J^n)_{00}` for `n < count`.
pub fn moments_from_jacobi<T: Scalar>(j: &JacobiData<T>, c0: &T, count: usize) -> Result<Vec<T>> {
    if c0.is_zero() {
        return Err(MopError::Domain("c_0 must be nonzero".into()));
    }
    let complete = matches!(j.support, Support::Finite(n) if n == j.len());
    if !complete && count > 2 * j.len() + 1 {
        return Err(MopError::Usage(format!(
            "{} recurrence terms determine only {} moments",
            j.len(),
            2 * j.len() + 1
        )));
    }
    // Truncated J with one extra row; b_L is never reached for n <= 2L.
    let size = j.len() + usize::from(!complete);
    let bk = |k: usize| if k < j.len() { j.b[k].clone() } else { T::zero() };
    let mut v = vec![T::zero(); size];
    v[0] = T::one();
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        out.push(c0.clone() * v[0].clone());
        if n + 1 == count {
            break;
        }
        v = (0..size)
            .map(|k| {
                let mut acc = bk(k) * v[k].clone();
                if k > 0 {
                    acc = acc + v[k - 1].clone();
                }
                if k + 1 < size {
                    acc = acc + j.a[k + 1].clone() * v[k + 1].clone();
                }
                acc
            })
            .collect();
    }
    Ok(out)
}

/// Monic `P_0..P_{n_max}` from the three-term recurrence.
pub fn three_term_polys<T: Scalar>(j: &JacobiData<T>, n_max: usize) -> Result<Vec<Poly<T>>> {
    if n_max > j.len() {
        return Err(MopError::Usage(format!(
            "P_{n_max} needs {n_max} recurrence terms, only {} available",
            j.len()
        )));
    }
    let mut out: Vec<Poly<T>> = Vec::with_capacity(n_max + 1);
    out.push(Poly::one());
    for n in 0..n_max {
        let mut next = out[n].mul_linear(&j.b[n]);
        if n > 0 {
            next = next - out[n - 1].scale(&j.a[n]);
        }
        out.push(next);
    }
    Ok(out)
}

/// Result of [`galant_one_step`]: transformed data plus `δ_n = P_{n+1}(z_0)/P_n(z_0)`.
#[derive(Debug, Clone)]
pub struct GalantStep<T> {
    pub data: JacobiData<T>,
    pub delta: Vec<T>,
}

/// Jacobi data of `(x - z_0) μ` from the data of `μ`.
///
/// Returns `len` coefficients and needs `len` input coefficients (so that
/// `a_len` is known). The `δ` update uses `+δ_{n-1}`, which is the form that
/// keeps `δ_n = P_{n+1}(z_0)/P_n(z_0)`.
pub fn galant_one_step<T: Scalar>(j: &JacobiData<T>, z0: &T, len: usize) -> Result<GalantStep<T>> {
    let finite = match j.support {
        Support::Finite(n) => Some(n),
        Support::Infinite => None,
    };
    let len = match finite {
        Some(n) => len.min(n),
        None => len,
    };
    if len == 0 || len > j.len() {
        return Err(MopError::Usage(format!(
            "one-step transform to length {len} needs that many input coefficients (have {})",
            j.len()
        )));
    }
    let breakdown = |n: usize, d: &T, s: f64| -> Result<()> {
        if d.is_negligible(s.max(1.0), EPS_BREAKDOWN) {
            return Err(MopError::OneStepBreakdown {
                n,
                reason: format!("z0 is a zero of P_{}", n + 1),
            });
        }
        Ok(())
    };
    let mut delta = Vec::with_capacity(len);
    let mut bh: Vec<T> = Vec::with_capacity(len);
    let mut ah: Vec<T> = vec![T::zero()];
    let d0 = z0.clone() - j.b[0].clone();
    breakdown(0, &d0, z0.abs_f64().max(j.b[0].abs_f64()))?;
    bh.push(j.b[0].clone() - j.a[1].clone() / d0.clone());
    delta.push(d0);
    for n in 1..len {
        let dn = bh[n - 1].clone() - j.b[n].clone() + delta[n - 1].clone();
        breakdown(n, &dn, bh[n - 1].abs_f64().max(j.b[n].abs_f64()))?;
        let an = j.a[n].clone() * dn.clone() / delta[n - 1].clone();
        bh.push(j.b[n].clone() + (an.clone() - j.a[n + 1].clone()) / dn.clone());
        ah.push(an);
        delta.push(dn);
    }
    // a_len of the transform needs δ_len, which needs b_len.
    if finite == Some(len) {
        ah.push(T::zero());
    } else if len < j.len() {
        let dn = bh[len - 1].clone() - j.b[len].clone() + delta[len - 1].clone();
        ah.push(j.a[len].clone() * dn / delta[len - 1].clone());
    } else {
        bh.pop();
        delta.pop();
    }
    let c0 = -(j.c0.clone() * delta[0].clone());
    let support = match finite {
        Some(n) => Support::Finite(n),
        None => Support::Infinite,
    };
    let data = JacobiData::new(bh, ah, c0, support)?;
    Ok(GalantStep { data, delta })
}

/// `K_n(z_0, x) = Σ_{k<n} P_k(z_0) P_k(x) / ⟨P_k, P_k⟩`.
pub fn kernel_poly<T: Scalar>(j: &JacobiData<T>, z0: &T, n: usize) -> Result<Poly<T>> {
    if n == 0 {
        return Ok(Poly::zero());
    }
    let polys = three_term_polys(j, n - 1)?;
    let mut acc = Poly::zero();
    for (k, p) in polys.iter().enumerate() {
        let h = j.norm(k);
        if h.is_zero() {
            return Err(MopError::OneStepBreakdown { n: k, reason: "vanishing norm".into() });
        }
        acc = acc + p.scale(&(p.eval(z0) / h));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FamilySpec;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn qq(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn laguerre(alpha: Rational) -> MomentFunctional<Rational> {
        MomentFunctional::family(Arc::new(FamilySpec::Laguerre1 { alphas: vec![alpha] }), 0).unwrap()
    }

    /// Literal route: monic `P_n` from the `n x n` Hankel solve, then inner products.
    fn hankel_oracle(c: &[Rational], len: usize) -> (Vec<Rational>, Vec<Rational>) {
        use crate::numerics::DenseMatrix;
        let inner = |p: &Poly<Rational>, shift: usize| -> Rational {
            p.coeffs().iter().enumerate().fold(q(0), |acc, (k, v)| acc + v * &c[k + shift])
        };
        let mut polys = vec![Poly::<Rational>::one()];
        for n in 1..=len {
            let rows: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|k| c[i + k].clone()).collect()).collect();
            let rhs: Vec<Rational> = (0..n).map(|i| -c[i + n].clone()).collect();
            let mut x = DenseMatrix::from_rows(rows).unwrap().solve(&rhs).unwrap();
            x.push(q(1));
            polys.push(Poly::new(x));
        }
        let norms: Vec<Rational> = polys.iter().map(|p| inner(&p.mul(p), 0)).collect();
        let b = (0..len).map(|n| inner(&polys[n].mul(&polys[n]), 1) / &norms[n]).collect();
        let mut a = vec![q(0)];
        a.extend((1..=len).map(|n| &norms[n] / &norms[n - 1]));
        (b, a)
    }

    #[test]
    fn charlier_matches_hankel_oracle() {
        let f = MomentFunctional::<Rational>::family(Arc::new(FamilySpec::Charlier { a: vec![q(1)] }), 0).unwrap();
        let j = jacobi_from_moments(&f, 7).unwrap();
        for n in 0..7 {
            assert_eq!(j.b[n], q(n as i64 + 1));
            assert_eq!(j.a[n], q(n as i64));
        }
        let (b, a) = hankel_oracle(&f.moments(15).unwrap(), 7);
        assert_eq!(j.b, b);
        assert_eq!(j.a, a);
    }

    #[test]
    fn dirac_has_support_one() {
        let f = MomentFunctional::point_masses(vec![q(3)], vec![q(1)]).unwrap();
        let j = jacobi_from_moments(&f, 5).unwrap();
        assert_eq!(j.support, Support::Finite(1));
        assert_eq!(j.b, vec![q(3)]);
        assert_eq!(j.a, vec![q(0), q(0)]);
    }

    #[test]
    fn two_points_detected_from_moments_alone() {
        let pm = MomentFunctional::point_masses(vec![q(1), q(2)], vec![q(1), q(1)]).unwrap();
        let f = MomentFunctional::from_moments(pm.moments(12).unwrap()).unwrap();
        let j = jacobi_from_moments(&f, 5).unwrap();
        assert_eq!(j.support, Support::Finite(2));
        let p = three_term_polys(&j, 2).unwrap();
        assert_eq!(p[2], Poly::new(vec![q(2), q(-3), q(1)]));
    }

    #[test]
    fn quasi_definite_violation() {
        // c = (1, 0, 0, 1, ...): Δ_2 = 0 while P_1 = x does not annihilate.
        let f = MomentFunctional::from_moments(vec![q(1), q(0), q(0), q(1), q(0), q(0), q(0)]).unwrap();
        assert!(matches!(jacobi_from_moments(&f, 3), Err(MopError::QuasiDefiniteViolation { n: 2 })));
    }

    #[test]
    fn conjugate_pair_jacobi_data() {
        let i = Complex64::new(0.0, 1.0);
        let f = MomentFunctional::point_masses(vec![i, -i], vec![Complex64::new(0.25, 0.0), Complex64::new(0.75, 0.0)])
            .unwrap();
        let j = jacobi_from_moments(&f, 4).unwrap();
        assert_eq!(j.support, Support::Finite(2));
        assert!((j.b[0] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((j.b[1] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        // ⟨P_1, P_1⟩ = c_2 + i c_1 - 1/4 = -3/4
        assert!((j.a[1] - Complex64::new(-0.75, 0.0)).norm() < 1e-15);
        let c = moments_from_jacobi(&j, &Complex64::new(1.0, 0.0), 3).unwrap();
        assert!((c[1] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn moments_roundtrip() {
        let j = JacobiData::new(
            (0..6).map(|n| q(n + 1)).collect(),
            (0..7).map(q).collect(),
            q(1),
            Support::Infinite,
        )
        .unwrap();
        let c = moments_from_jacobi(&j, &q(1), 13).unwrap();
        assert_eq!(&c[..6], &[q(1), q(1), q(2), q(5), q(15), q(52)]);
        let back = jacobi_from_moment_slice(&c, 6).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn dirac_at_zero_moments() {
        let j = JacobiData::new(vec![q(0)], vec![q(0), q(0)], q(1), Support::Finite(1)).unwrap();
        assert_eq!(moments_from_jacobi(&j, &q(1), 4).unwrap(), vec![q(1), q(0), q(0), q(0)]);
    }

    #[test]
    fn laguerre_polys_and_galant_shift() {
        let j = jacobi_from_moments(&laguerre(q(0)), 22).unwrap();
        let p = three_term_polys(&j, 2).unwrap();
        assert_eq!(p[2], Poly::new(vec![q(2), q(-4), q(1)]));
        let g = galant_one_step(&j, &q(0), 21).unwrap();
        for n in 0..=20 {
            assert_eq!(g.data.b[n], q(2 * n as i64 + 2));
            assert_eq!(g.data.a[n], q(n as i64 * (n as i64 + 1)));
        }
        let polys = three_term_polys(&j, 21).unwrap();
        for n in 0..21 {
            assert_eq!(g.delta[n], polys[n + 1].eval(&q(0)) / polys[n].eval(&q(0)));
        }
        assert_eq!(g.data.c0, q(1));
    }

    #[test]
    fn galant_agrees_with_modified_moments() {
        let base = Arc::new(laguerre(qq(1, 2)));
        let j = jacobi_from_moments(&base, 11).unwrap();
        let g = galant_one_step(&j, &q(-3), 10).unwrap();
        let m = MomentFunctional::apply_polynomial(&base, Poly::linear(q(-3))).unwrap();
        let direct = jacobi_from_moments(&m, 10).unwrap();
        assert_eq!(g.data, direct);
    }

    #[test]
    fn galant_on_dirac_keeps_b0() {
        let j = JacobiData::new(vec![q(4)], vec![q(0), q(0)], q(1), Support::Finite(1)).unwrap();
        let g = galant_one_step(&j, &q(1), 1).unwrap();
        assert_eq!(g.data.b, vec![q(4)]);
    }

    #[test]
    fn galant_breakdown_on_root() {
        let j = JacobiData::new(vec![q(0); 4], vec![q(0), q(1), q(1), q(1), q(1)], q(1), Support::Infinite).unwrap();
        assert!(matches!(galant_one_step(&j, &q(0), 3), Err(MopError::OneStepBreakdown { n: 0, .. })));
    }

    #[test]
    fn kernel_polynomials() {
        let j = jacobi_from_moments(&laguerre(q(0)), 8).unwrap();
        assert_eq!(kernel_poly(&j, &q(0), 1).unwrap(), Poly::constant(q(1)));
        assert_eq!(kernel_poly(&j, &q(0), 2).unwrap(), Poly::new(vec![q(2), q(-1)]));
        let z0 = q(-2);
        let g = galant_one_step(&j, &z0, 7).unwrap();
        let hat = three_term_polys(&g.data, 5).unwrap();
        let p = three_term_polys(&j, 5).unwrap();
        for n in 0..5 {
            let lhs = hat[n].scale(&(p[n].eval(&z0) / j.norm(n)));
            assert_eq!(lhs, kernel_poly(&j, &z0, n + 1).unwrap());
        }
    }

    #[test]
    fn float_route_prefers_exact_shadow() {
        let f = MomentFunctional::<f64>::family(
            Arc::new(FamilySpec::JacobiPineiro { alphas: vec![q(0)], beta: q(0) }),
            0,
        )
        .unwrap();
        let j = marginal_jacobi(&f, 30).unwrap();
        // Legendre on [0,1]: b_n = 1/2, a_n = n^2 / (4 (4n^2 - 1))
        for n in 1..30 {
            let nf = n as f64;
            assert!((j.b[n] - 0.5).abs() < 1e-14);
            assert!((j.a[n] - nf * nf / (4.0 * (4.0 * nf * nf - 1.0))).abs() < 1e-14);
        }
    }
}
