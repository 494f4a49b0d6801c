use std::sync::{Arc, RwLock};

use super::family::FamilySpec;
use super::quadrature::Discretization;
use crate::error::{MopError, Result};
use crate::numerics::{Poly, Rational, Scalar};

/// Size of the support of a functional (`Finite(N)` means it lies in `L_N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Support {
    Finite(usize),
    Infinite,
}

impl Support {
    pub fn cap(self) -> Option<usize> {
        match self {
            Support::Finite(n) => Some(n),
            Support::Infinite => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Source<T> {
    Moments(Vec<T>),
    Family { spec: Arc<FamilySpec>, component: usize },
    PointMasses { points: Vec<T>, weights: Vec<T> },
    /// `f ↦ Σ_z Σ_{d < mult} w_{z,d} f^{(d)}(z)`: a functional in `L_m` whose
    /// degree-`m` orthogonal polynomial has the given roots. `weights` is flat,
    /// root by root, one entry per derivative order.
    Jet { roots: Vec<(T, usize)>, weights: Vec<T> },
    Modified { base: Arc<MomentFunctional<T>>, phi: Poly<T> },
}

/// Linear functional on polynomials, described by how its moments are produced.
///
/// Moments are memoized in an append-only cache; all methods take `&self`.
#[derive(Debug)]
pub struct MomentFunctional<T> {
    source: Source<T>,
    support: Support,
    cache: RwLock<Vec<T>>,
}

impl<T: Scalar> Clone for MomentFunctional<T> {
    fn clone(&self) -> Self {
        MomentFunctional {
            source: self.source.clone(),
            support: self.support,
            cache: RwLock::new(self.cache.read().expect("moment cache").clone()),
        }
    }
}

impl<T: Scalar> MomentFunctional<T> {
    fn with(source: Source<T>, support: Support) -> Self {
        MomentFunctional { source, support, cache: RwLock::new(Vec::new()) }
    }

    /// Explicit finite list of moments; requests past the end are an error.
    pub fn from_moments(moments: Vec<T>) -> Result<Self> {
        if moments.first().is_none_or(|c| c.is_zero()) {
            return Err(MopError::Domain("moment c_0 must be nonzero".into()));
        }
        Ok(Self::with(Source::Moments(moments), Support::Infinite))
    }

    /// Declares the support size of an explicit functional.
    pub fn with_support(mut self, support: Support) -> Self {
        self.support = support;
        self
    }

    pub fn family(spec: Arc<FamilySpec>, component: usize) -> Result<Self> {
        spec.validate()?;
        if component >= spec.rank() {
            return Err(MopError::Usage(format!(
                "component {component} out of range for {}",
                spec.name()
            )));
        }
        if !T::EXACT || spec.is_exact(component) {
            let support = spec.support_size().map_or(Support::Infinite, Support::Finite);
            Ok(Self::with(Source::Family { spec, component }, support))
        } else {
            Err(MopError::Backend { needed: "float" })
        }
    }

    /// `Σ w_i δ_{z_i}`; coincident points are merged.
    pub fn point_masses(points: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(MopError::Usage("points and weights must be nonempty and of equal length".into()));
        }
        if weights.iter().any(|w| w.is_zero()) {
            return Err(MopError::Domain("point-mass weights must be nonzero".into()));
        }
        let mut pts: Vec<T> = Vec::new();
        let mut wts: Vec<T> = Vec::new();
        for (p, w) in points.into_iter().zip(weights) {
            match pts.iter().position(|q| *q == p) {
                Some(i) => wts[i] = wts[i].clone() + w,
                None => {
                    pts.push(p);
                    wts.push(w);
                }
            }
        }
        let support = wts.iter().filter(|w| !w.is_zero()).count();
        let f = Self::with(Source::PointMasses { points: pts, weights: wts }, Support::Finite(support));
        if f.moment(0)?.is_zero() {
            return Err(MopError::Domain("total mass must be nonzero".into()));
        }
        Ok(f)
    }

    /// Functional in `L_m` (`m = Σ mult`) whose monic degree-`m` orthogonal polynomial is `Π (x - z)^mult`.
    ///
    /// `weights` default to all 1. One weight per root scales that root's
    /// whole contribution; one per derivative order (`m` in total, root by
    /// root) weights each `f^{(d)}(z)` separately.
    pub fn jet(roots: Vec<(T, usize)>, weights: Option<Vec<T>>) -> Result<Self> {
        if roots.is_empty() || roots.iter().any(|(_, m)| *m == 0) {
            return Err(MopError::Usage("jet functional needs positive multiplicities".into()));
        }
        let m: usize = roots.iter().map(|r| r.1).sum();
        let weights = match weights {
            None => vec![T::one(); m],
            Some(w) if w.len() == m => w,
            Some(w) if w.len() == roots.len() => {
                roots.iter().zip(w).flat_map(|((_, k), v)| std::iter::repeat_n(v, *k)).collect()
            }
            Some(w) => {
                return Err(MopError::Usage(format!("{} jet weights for {} roots of total multiplicity {m}", w.len(), roots.len())))
            }
        };
        if weights.iter().any(|w| w.is_zero()) {
            return Err(MopError::Domain("jet weights must be nonzero".into()));
        }
        let f = Self::with(Source::Jet { roots, weights }, Support::Finite(m));
        if f.moment(0)?.is_zero() {
            return Err(MopError::Domain("total mass must be nonzero".into()));
        }
        Ok(f)
    }

    /// `Φ·f`, the functional `p ↦ f[p Φ]`.
    pub fn apply_polynomial(base: &Arc<Self>, phi: Poly<T>) -> Result<Self> {
        if phi.is_zero() {
            return Err(MopError::Usage("modifier polynomial must be nonzero".into()));
        }
        let support = match base.support {
            Support::Infinite => Support::Infinite,
            Support::Finite(n) => Support::Finite(n - base.annihilated_points(&phi).min(n)),
        };
        Ok(Self::with(Source::Modified { base: base.clone(), phi }, support))
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Support points hit exactly by roots of `phi`.
    fn annihilated_points(&self, phi: &Poly<T>) -> usize {
        let hit = |p: &T| phi.eval(p).is_zero();
        match &self.source {
            Source::PointMasses { points, .. } => points.iter().filter(|p| hit(p)).count(),
            Source::Family { spec, component } => match spec.mass_points(*component) {
                Some((pts, _)) => pts.iter().filter(|p| hit(&T::from_rational(p))).count(),
                None => 0,
            },
            Source::Modified { base, .. } => base.annihilated_points(phi),
            _ => 0,
        }
    }

    pub fn moment(&self, n: usize) -> Result<T> {
        Ok(self.moments(n + 1)?.pop().expect("nonempty"))
    }

    /// The first `count` moments.
    pub fn moments(&self, count: usize) -> Result<Vec<T>> {
        {
            let c = self.cache.read().expect("moment cache");
            if c.len() >= count {
                return Ok(c[..count].to_vec());
            }
        }
        let fresh = self.compute(count)?;
        let mut c = self.cache.write().expect("moment cache");
        if c.len() < fresh.len() {
            *c = fresh;
        }
        Ok(c[..count].to_vec())
    }

    fn compute(&self, count: usize) -> Result<Vec<T>> {
        match &self.source {
            Source::Moments(v) => {
                if count > v.len() {
                    return Err(MopError::Usage(format!(
                        "only {} moments were given, {count} needed",
                        v.len()
                    )));
                }
                Ok(v[..count].to_vec())
            }
            Source::Family { spec, component } => {
                if let Some(ex) = spec.exact_moments(*component, count) {
                    return Ok(ex.iter().map(T::from_rational).collect());
                }
                spec.float_moments(*component, count)
                    .into_iter()
                    .map(|v| T::from_f64(v).ok_or(MopError::Backend { needed: "float" }))
                    .collect()
            }
            Source::PointMasses { points, weights } => {
                let mut out = vec![T::zero(); count];
                for (p, w) in points.iter().zip(weights) {
                    let mut acc = w.clone();
                    for slot in out.iter_mut() {
                        *slot = slot.clone() + acc.clone();
                        acc = acc * p.clone();
                    }
                }
                Ok(out)
            }
            Source::Jet { roots, weights } => {
                let mut out = vec![T::zero(); count];
                let mut w = weights.iter();
                for (z, mult) in roots {
                    for d in 0..*mult {
                        let w = w.next().expect("one weight per derivative order");
                        // d-th derivative of x^n at z: n!/(n-d)! z^{n-d}
                        for (n, slot) in out.iter_mut().enumerate().skip(d) {
                            let falling = (0..d).fold(T::one(), |acc, i| acc * T::from_i64((n - i) as i64));
                            *slot = slot.clone() + w.clone() * falling * z.pow((n - d) as u32);
                        }
                    }
                }
                Ok(out)
            }
            Source::Modified { base, phi } => {
                let deg = phi.coeffs().len().saturating_sub(1);
                let c = base.moments(count + deg)?;
                Ok((0..count)
                    .map(|n| {
                        phi.coeffs()
                            .iter()
                            .enumerate()
                            .fold(T::zero(), |acc, (k, f)| acc + f.clone() * c[n + k].clone())
                    })
                    .collect())
            }
        }
    }

    /// Exact rational moments when every ingredient is real and rational.
    pub fn rational_moments(&self, count: usize) -> Option<Vec<Rational>> {
        match &self.source {
            Source::Moments(v) => {
                if count > v.len() {
                    return None;
                }
                v[..count].iter().map(Scalar::to_rational).collect()
            }
            Source::Family { spec, component } => spec.exact_moments(*component, count),
            Source::PointMasses { points, weights } => {
                let pts: Option<Vec<Rational>> = points.iter().map(Scalar::to_rational).collect();
                let wts: Option<Vec<Rational>> = weights.iter().map(Scalar::to_rational).collect();
                MomentFunctional::point_masses(pts?, wts?).ok()?.moments(count).ok()
            }
            Source::Jet { roots, weights } => {
                let rs: Option<Vec<(Rational, usize)>> =
                    roots.iter().map(|(z, m)| z.to_rational().map(|q| (q, *m))).collect();
                let wts: Option<Vec<Rational>> = weights.iter().map(Scalar::to_rational).collect();
                MomentFunctional::jet(rs?, Some(wts?)).ok()?.moments(count).ok()
            }
            Source::Modified { base, phi } => {
                let coeffs: Option<Vec<Rational>> = phi.coeffs().iter().map(Scalar::to_rational).collect();
                let phi = Poly::new(coeffs?);
                let deg = phi.coeffs().len().saturating_sub(1);
                let c = base.rational_moments(count + deg)?;
                Some(
                    (0..count)
                        .map(|n| {
                            phi.coeffs()
                                .iter()
                                .enumerate()
                                .fold(Rational::from_i64(0), |acc, (k, f)| acc + f * &c[n + k])
                        })
                        .collect(),
                )
            }
        }
    }

    /// Whether [`Self::rational_moments`] is available with small denominators,
    /// so that exact arithmetic on the shadow stays cheap.
    pub fn has_cheap_rational_shadow(&self) -> bool {
        fn small<T: Scalar>(v: &T) -> bool {
            v.to_rational().is_some_and(|q| q.denom().bits() <= 32 && q.numer().bits() <= 64)
        }
        match &self.source {
            Source::Moments(v) => v.iter().all(small),
            Source::Family { spec, component } => spec.is_exact(*component),
            Source::PointMasses { points, weights } => points.iter().chain(weights).all(small),
            Source::Jet { roots, weights } => weights.iter().all(small) && roots.iter().all(|(z, _)| small(z)),
            Source::Modified { base, phi } => phi.coeffs().iter().all(small) && base.has_cheap_rational_shadow(),
        }
    }

    /// Real discretization for quadrature-backed functionals.
    pub fn discretization(&self) -> Option<Discretization> {
        match &self.source {
            Source::Family { spec, component } => spec.discretization(*component),
            Source::Modified { base, phi } => {
                let coeffs: Option<Vec<f64>> = phi
                    .coeffs()
                    .iter()
                    .map(|c| {
                        let z = c.to_complex();
                        (z.im == 0.0).then_some(z.re)
                    })
                    .collect();
                let phi = Poly::new(coeffs?);
                Some(base.discretization()?.reweighted(|x| phi.eval(&x)))
            }
            _ => None,
        }
    }
}

/// Ordered system `(μ_1, …, μ_r)` sharing one scalar backend.
#[derive(Debug, Clone)]
pub struct MopSystem<T> {
    pub functionals: Vec<Arc<MomentFunctional<T>>>,
}

impl<T: Scalar> MopSystem<T> {
    pub fn new(functionals: Vec<MomentFunctional<T>>) -> Result<Self> {
        if functionals.is_empty() {
            return Err(MopError::Usage("a system needs at least one functional".into()));
        }
        Ok(MopSystem { functionals: functionals.into_iter().map(Arc::new).collect() })
    }

    pub fn from_family(spec: FamilySpec) -> Result<Self> {
        let spec = Arc::new(spec);
        let fs = (0..spec.rank())
            .map(|j| MomentFunctional::family(spec.clone(), j))
            .collect::<Result<Vec<_>>>()?;
        Self::new(fs)
    }

    pub fn rank(&self) -> usize {
        self.functionals.len()
    }

    /// Per-axis support caps (`None` = infinite).
    pub fn nvec(&self) -> Vec<Option<usize>> {
        self.functionals.iter().map(|f| f.support().cap()).collect()
    }

    /// Appends a functional as the new last axis.
    pub fn with_appended(&self, f: MomentFunctional<T>) -> Self {
        let mut functionals = self.functionals.clone();
        functionals.push(Arc::new(f));
        MopSystem { functionals }
    }

    /// `(Φ μ_1, …, Φ μ_r)`.
    pub fn modified(&self, phi: &Poly<T>) -> Result<Self> {
        let fs = self
            .functionals
            .iter()
            .map(|f| MomentFunctional::apply_polynomial(f, phi.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(fs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn dirac_moments() {
        let f = MomentFunctional::point_masses(vec![q(3)], vec![q(1)]).unwrap();
        assert_eq!(f.moments(4).unwrap(), vec![q(1), q(3), q(9), q(27)]);
        assert_eq!(f.support(), Support::Finite(1));
    }

    #[test]
    fn conjugate_pair_moments() {
        let i = Complex64::new(0.0, 1.0);
        let f = MomentFunctional::point_masses(vec![i, -i], vec![Complex64::new(0.25, 0.0), Complex64::new(0.75, 0.0)])
            .unwrap();
        let m = f.moments(3).unwrap();
        assert_eq!(m[0], Complex64::new(1.0, 0.0));
        assert_eq!(m[1], Complex64::new(0.0, -0.5));
        assert_eq!(m[2], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn modification_shifts_laguerre_moments() {
        let spec = Arc::new(FamilySpec::Laguerre1 { alphas: vec![q(0)] });
        let base = Arc::new(MomentFunctional::<Rational>::family(spec, 0).unwrap());
        let x = Poly::new(vec![q(0), q(1)]);
        let m = MomentFunctional::apply_polynomial(&base, x).unwrap();
        assert_eq!(m.moments(4).unwrap(), vec![q(1), q(2), q(6), q(24)]);
        let one = MomentFunctional::apply_polynomial(&base, Poly::one()).unwrap();
        assert_eq!(one.moments(5).unwrap(), base.moments(5).unwrap());
    }

    #[test]
    fn root_on_support_point_drops_mass() {
        let base = Arc::new(MomentFunctional::point_masses(vec![q(1), q(2)], vec![q(1), q(1)]).unwrap());
        let m = MomentFunctional::apply_polynomial(&base, Poly::linear(q(1))).unwrap();
        assert_eq!(m.moments(4).unwrap(), vec![q(1), q(2), q(4), q(8)]);
        assert_eq!(m.support(), Support::Finite(1));
    }

    #[test]
    fn jet_functional_has_double_root() {
        let f = MomentFunctional::jet(vec![(q(0), 2)], None).unwrap();
        assert_eq!(f.moments(4).unwrap(), vec![q(1), q(1), q(0), q(0)]);
        let g = MomentFunctional::jet(vec![(q(5), 2)], None).unwrap();
        // f(5) + f'(5) for f = x^n
        assert_eq!(g.moments(3).unwrap(), vec![q(1), q(6), q(35)]);
    }

    #[test]
    fn exact_family_rejects_float_only_components_on_rationals() {
        let spec = Arc::new(FamilySpec::JacobiHermite { gamma: q(0) });
        assert!(matches!(
            MomentFunctional::<Rational>::family(spec.clone(), 0),
            Err(MopError::Backend { .. })
        ));
        assert!(MomentFunctional::<f64>::family(spec, 0).is_ok());
    }

    #[test]
    fn explicit_moments_are_bounded() {
        let f = MomentFunctional::from_moments(vec![q(1), q(2)]).unwrap();
        assert!(f.moment(1).is_ok());
        assert!(matches!(f.moment(2), Err(MopError::Usage(_))));
    }
}
