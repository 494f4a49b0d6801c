use super::scalar::Scalar;

/// Dense univariate polynomial, coefficients in ascending powers.
///
/// Trailing exact zeros are always dropped; tiny float tails stay until
/// [`Poly::trimmed`] is called.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![T::one()] }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// `x - z`.
    pub fn linear(z: T) -> Self {
        Poly::new(vec![-z, T::one()])
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![T::zero(); k + 1];
        c[k] = T::one();
        Poly { coeffs: c }
    }

    /// Monic polynomial with the given roots, each repeated by its multiplicity.
    pub fn from_roots(roots: &[(T, usize)]) -> Self {
        let mut p = Poly::one();
        for (z, m) in roots {
            for _ in 0..*m {
                p = p.mul_linear(z);
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `x^k` (zero past the end).
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn leading(&self) -> T {
        self.degree().map(|d| self.coeffs[d].clone()).unwrap_or_else(T::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == T::one()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// Drops trailing coefficients smaller than `rel` times the largest one.
    pub fn trimmed(mut self, rel: f64) -> Self {
        let thr = rel * self.max_abs();
        while self.coeffs.last().is_some_and(|c| c.abs_f64() <= thr) {
            self.coeffs.pop();
        }
        self
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn mul_x(&self) -> Self {
        if self.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(T::zero());
        c.extend(self.coeffs.iter().cloned());
        Poly { coeffs: c }
    }

    /// `(x - z) * self`.
    pub fn mul_linear(&self, z: &T) -> Self {
        self.mul_x() - self.scale(z)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut c = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(c)
    }

    /// `p(x + h)`.
    pub fn shift(&self, h: &T) -> Self {
        // Horner in the composed variable.
        let mut acc = Poly::zero();
        let lin = Poly::new(vec![h.clone(), T::one()]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin) + Poly::constant(c.clone());
        }
        acc
    }

    /// Euclidean division; `None` when the divisor is zero.
    pub fn div_rem(&self, d: &Self) -> Option<(Self, Self)> {
        let dd = d.degree()?;
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let Some(sd) = self.degree() else {
            return Some((Poly::zero(), Poly::zero()));
        };
        if sd < dd {
            return Some((Poly::zero(), self.clone()));
        }
        let mut q = vec![T::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let f = rem[k + dd].clone() / lead.clone();
            for (i, dc) in d.coeffs[..=dd].iter().enumerate() {
                rem[k + i] = rem[k + i].clone() - f.clone() * dc.clone();
            }
            rem[k + dd] = T::zero();
            q[k] = f;
        }
        rem.truncate(dd);
        Some((Poly::new(q), Poly::new(rem)))
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).max_abs()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Scalar> std::ops::Add for Poly<T> {
    type Output = Poly<T>;
    fn add(self, o: Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl<T: Scalar> std::ops::Sub for Poly<T> {
    type Output = Poly<T>;
    fn sub(self, o: Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl<T: Scalar> std::ops::Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Self {
        Poly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

/// Polynomial in two variables; `coeffs[i][j]` multiplies `x^i y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly<T> {
    coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> BiPoly<T> {
    pub fn zero() -> Self {
        BiPoly { coeffs: Vec::new() }
    }

    /// `p(x) q(y)`.
    pub fn outer(p: &Poly<T>, q: &Poly<T>) -> Self {
        BiPoly {
            coeffs: p
                .coeffs()
                .iter()
                .map(|a| q.coeffs().iter().map(|b| a.clone() * b.clone()).collect())
                .collect(),
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> T {
        self.coeffs.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn add_assign(&mut self, o: &Self, sign: &T) {
        if self.coeffs.len() < o.coeffs.len() {
            self.coeffs.resize(o.coeffs.len(), Vec::new());
        }
        for (i, row) in o.coeffs.iter().enumerate() {
            let mine = &mut self.coeffs[i];
            if mine.len() < row.len() {
                mine.resize(row.len(), T::zero());
            }
            for (j, c) in row.iter().enumerate() {
                mine[j] = mine[j].clone() + sign.clone() * c.clone();
            }
        }
    }

    /// Univariate polynomial in `y` at fixed `x`.
    pub fn at_x(&self, x: &T) -> Poly<T> {
        let width = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![T::zero(); width];
        let mut xp = T::one();
        for row in &self.coeffs {
            for (j, c) in row.iter().enumerate() {
                out[j] = out[j].clone() + c.clone() * xp.clone();
            }
            xp = xp * x.clone();
        }
        Poly::new(out)
    }

    /// Univariate polynomial in `x` at fixed `y`.
    pub fn at_y(&self, y: &T) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|row| Poly::new(row.clone()).eval(y)).collect())
    }

    /// `(x - y) * self`.
    pub fn mul_x_minus_y(&self) -> Self {
        let rows = self.coeffs.len() + 1;
        let width = self.coeffs.iter().map(Vec::len).max().unwrap_or(0) + 1;
        let mut out = vec![vec![T::zero(); width]; rows];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                out[i + 1][j] = out[i + 1][j].clone() + c.clone();
                out[i][j + 1] = out[i][j + 1].clone() - c.clone();
            }
        }
        BiPoly { coeffs: out }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    pub fn distance(&self, o: &Self) -> f64 {
        let mut d = self.clone();
        d.add_assign(o, &(-T::one()));
        d.max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;

    fn qp(c: &[i64]) -> Poly<Rational> {
        Poly::new(c.iter().map(|&v| Rational::from_i64(v)).collect())
    }

    #[test]
    fn eval_horner() {
        let p = qp(&[1, 0, 1]);
        assert_eq!(p.eval(&Rational::from_i64(2)), Rational::from_i64(5));
        let q = Poly::new(vec![2.0, 3.0]);
        assert_eq!(q.eval(&2.0), 8.0);
    }

    #[test]
    fn evaluating_zero_poly() {
        assert_eq!(Poly::<Rational>::zero().eval(&Rational::from_i64(7)), Rational::from_i64(0));
        assert_eq!(Poly::<Rational>::zero().degree(), None);
    }

    #[test]
    fn trailing_zeros_trimmed_exactly() {
        assert_eq!(qp(&[1, 2, 0, 0]).coeffs().len(), 2);
        let f = Poly::new(vec![1.0, 1e-20]).trimmed(1e-15);
        assert_eq!(f.coeffs().len(), 1);
    }

    #[test]
    fn division_roundtrip() {
        let a = qp(&[-6, 11, -6, 1]);
        let d = qp(&[-1, 1]);
        let (q, r) = a.div_rem(&d).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, qp(&[6, -5, 1]));
        assert_eq!(q.mul(&d), a);
    }

    #[test]
    fn shift_and_roots() {
        let p = Poly::from_roots(&[(Rational::from_i64(1), 1), (Rational::from_i64(2), 2)]);
        assert_eq!(p, qp(&[-4, 8, -5, 1]));
        let s = p.shift(&Rational::from_i64(1));
        assert_eq!(s.eval(&Rational::from_i64(0)), Rational::from_i64(0));
        assert_eq!(s.eval(&Rational::from_i64(1)), Rational::from_i64(0));
    }

    #[test]
    fn bivariate_slices() {
        let p = qp(&[1, 1]);
        let q = qp(&[0, 2]);
        let b = BiPoly::outer(&p, &q);
        assert_eq!(b.at_x(&Rational::from_i64(1)), qp(&[0, 4]));
        assert_eq!(b.at_y(&Rational::from_i64(1)), qp(&[2, 2]));
        let m = b.mul_x_minus_y();
        let x = Rational::from_i64(3);
        let y = Rational::from_i64(5);
        assert_eq!(
            m.at_x(&x).eval(&y),
            (x.clone() - y.clone()) * p.eval(&x) * q.eval(&y)
        );
    }
}
