use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MopError, Result};
use crate::functionals::MomentFunctional;
use crate::numerics::{Poly, Rational, Scalar};

/// Seed of the retry weights; fixed so repeated runs agree byte for byte.
pub const RETRY_SEED: u64 = 0x6d6f_7063_6872;

/// `Φ(x) = Π (x - z)^mult` together with the functional weights and the depth
/// of the transformed lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec<T> {
    roots: Vec<(T, usize)>,
    weights: Option<Vec<T>>,
    pub dmax: usize,
}

fn canonical_order<T: Scalar>(x: &T, y: &T) -> Ordering {
    let (a, b) = (x.to_complex(), y.to_complex());
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl<T: Scalar> TransformSpec<T> {
    /// Roots with multiplicities, sorted by real then imaginary part.
    /// Equal roots are merged by adding multiplicities.
    pub fn new(roots: Vec<(T, usize)>, weights: Option<Vec<T>>, dmax: usize) -> Result<Self> {
        if roots.is_empty() || roots.iter().any(|r| r.1 == 0) {
            return Err(MopError::Usage("Φ needs at least one root of positive multiplicity".into()));
        }
        if let Some(w) = &weights {
            if w.len() != roots.len() {
                return Err(MopError::Usage(format!("{} weights given for {} roots", w.len(), roots.len())));
            }
            if w.iter().any(|v| v.is_zero()) {
                return Err(MopError::Domain("transform weights must be nonzero".into()));
            }
        }
        let mut order: Vec<usize> = (0..roots.len()).collect();
        order.sort_by(|&i, &j| canonical_order(&roots[i].0, &roots[j].0));
        let mut merged: Vec<(T, usize)> = Vec::new();
        let mut wts: Vec<T> = Vec::new();
        for i in order {
            let (z, m) = roots[i].clone();
            match merged.last_mut() {
                Some(last) if last.0 == z => {
                    if weights.is_some() {
                        return Err(MopError::Usage("weights need distinct roots; use multiplicities".into()));
                    }
                    last.1 += m;
                }
                _ => {
                    merged.push((z, m));
                    if let Some(w) = &weights {
                        wts.push(w[i].clone());
                    }
                }
            }
        }
        Ok(TransformSpec { roots: merged, weights: weights.map(|_| wts), dmax })
    }

    /// Simple roots (repeats become multiplicities).
    pub fn from_roots(roots: Vec<T>, dmax: usize) -> Result<Self> {
        Self::new(roots.into_iter().map(|z| (z, 1)).collect(), None, dmax)
    }

    pub fn roots(&self) -> &[(T, usize)] {
        &self.roots
    }

    pub fn weights(&self) -> Option<&[T]> {
        self.weights.as_deref()
    }

    /// `m = deg Φ`.
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.1).sum()
    }

    pub fn is_confluent(&self) -> bool {
        self.roots.iter().any(|r| r.1 > 1)
    }

    pub fn phi(&self) -> Poly<T> {
        Poly::from_roots(&self.roots)
    }

    /// Each root repeated by its multiplicity, in canonical order.
    pub fn root_list(&self) -> Vec<T> {
        self.roots.iter().flat_map(|(z, m)| std::iter::repeat_n(z.clone(), *m)).collect()
    }

    /// The functional in `L_m` whose degree-`m` orthogonal polynomial is `Φ`.
    pub fn functional(&self) -> Result<MomentFunctional<T>> {
        self.functional_with(self.weights.clone())
    }

    pub(crate) fn functional_with(&self, weights: Option<Vec<T>>) -> Result<MomentFunctional<T>> {
        if self.is_confluent() {
            MomentFunctional::jet(self.roots.clone(), weights)
        } else {
            let n = self.roots.len();
            let w = weights.unwrap_or_else(|| vec![T::one(); n]);
            MomentFunctional::point_masses(self.roots.iter().map(|r| r.0.clone()).collect(), w)
        }
    }

    /// Seeded pseudo-random positive rational weights `p/q`, `1 ≤ p ≤ 97`, `1 ≤ q ≤ 64`.
    ///
    /// One per root for simple roots. A confluent `Φ` gets one per derivative
    /// order, since rescaling a single jet leaves its recurrence unchanged.
    pub fn retry_weights(&self) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(RETRY_SEED);
        let count = if self.is_confluent() { self.degree() } else { self.roots.len() };
        (0..count)
            .map(|_| {
                let p: i64 = rng.gen_range(1..=97);
                let q: i64 = rng.gen_range(1..=64);
                T::from_rational(&Rational::new(p.into(), q.into()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn canonical_roots_and_functional() {
        let t = TransformSpec::from_roots(vec![q(7), q(5), q(7)], 4).unwrap();
        assert_eq!(t.roots(), &[(q(5), 1), (q(7), 2)]);
        assert_eq!(t.degree(), 3);
        assert!(t.is_confluent());
        assert_eq!(t.phi(), Poly::from_roots(&[(q(5), 1), (q(7), 2)]));
        let d = TransformSpec::from_roots(vec![q(-1)], 3).unwrap().functional().unwrap();
        assert_eq!(d.moments(3).unwrap(), vec![q(1), q(-1), q(1)]);
        let x2 = TransformSpec::new(vec![(q(0), 2)], None, 3).unwrap().functional().unwrap();
        assert_eq!(x2.moments(4).unwrap(), vec![q(1), q(1), q(0), q(0)]);
    }

    #[test]
    fn retry_weights_are_seeded() {
        let t = TransformSpec::from_roots(vec![q(1), q(2)], 4).unwrap();
        let w = t.retry_weights();
        assert_eq!(w, t.retry_weights());
        assert!(w.iter().all(|v| *v > q(0)));
    }
}
