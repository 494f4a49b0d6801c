use nalgebra::DMatrix;
use num_complex::Complex64;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, Signed, Zero};
use std::cmp::Ordering;

use crate::error::{MopError, Result};
use crate::numerics::tol::{BISECT_MAX_DEGREE, ROOT_CLUSTER};
use crate::numerics::{Poly, Rational, Scalar};

/// Zeros of a polynomial, sorted by real part (then imaginary part).
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    /// Distinct roots; clustered roots are merged to their mean.
    pub values: Vec<Complex64>,
    /// Multiplicity of each entry of `values`.
    pub multiplicity: Vec<usize>,
    /// `|P(z)|` at each root after polishing.
    pub residuals: Vec<f64>,
    /// Every root has `|Im z|` below the cluster tolerance.
    pub real: bool,
    pub cluster_tolerance: f64,
}

impl RootSet {
    /// Real parts, each repeated by its multiplicity.
    pub fn reals(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.multiplicity)
            .flat_map(|(z, m)| std::iter::repeat_n(z.re, *m))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.multiplicity.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicity.iter().all(|&m| m == 1)
    }

    /// Applies `x ↦ s x + t` to every root (`s > 0` keeps the order).
    pub fn affine(&self, s: f64, t: f64) -> RootSet {
        let mut out = self.clone();
        for z in &mut out.values {
            *z = *z * s + t;
        }
        if s < 0.0 {
            out.values.reverse();
            out.multiplicity.reverse();
            out.residuals.reverse();
        }
        out
    }
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = p;
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// `Σ |c_k| |z|^k`, the natural scale of `|P(z)|`.
fn eval_scale(c: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, ck| acc * r + ck.norm())
}

/// Parlett–Reinsch balancing, then the eigenvalues of the companion matrix.
fn companion_roots(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    if monic.iter().all(|v| v.im == 0.0) {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            m[(i, n - 1)] = -monic[i].re;
        }
        balance(&mut m);
        m.complex_eigenvalues().iter().cloned().collect()
    } else {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -monic[i];
        }
        m.eigenvalues().map(|v| v.iter().cloned().collect()).unwrap_or_default()
    }
}

fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc > rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Denominator-cleared integer coefficients of an exact polynomial.
fn integer_coeffs(p: &[Rational]) -> Vec<BigInt> {
    let lcm = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    p.iter().map(|c| c.numer() * (&lcm / c.denom())).collect()
}

/// Sign of the integer polynomial at the float `x`, evaluated exactly.
fn sign_at(p: &[BigInt], x: f64) -> Ordering {
    let (mant, exp, sign) = x.integer_decode();
    let m = BigInt::from(mant) * i64::from(sign);
    let deg = p.len() - 1;
    let v = if exp >= 0 {
        let x = m << exp as usize;
        p.iter().rev().fold(BigInt::zero(), |acc, c| acc * &x + c)
    } else {
        // x = m 2^exp, so 2^(-exp deg) p(x) is an integer
        let s = (-exp) as usize;
        p.iter().enumerate().rev().fold(BigInt::zero(), |acc, (i, c)| acc * &m + (c << (s * (deg - i))))
    };
    v.cmp(&BigInt::zero())
}

fn abs_at(p: &[Rational], x: f64) -> Rational {
    let x = Rational::from_float(x).unwrap_or_else(|| Rational::from_i64(0));
    p.iter().rev().fold(Rational::from_i64(0), |acc, c| acc * &x + c).abs()
}

/// Narrows a float root to adjacent floats straddling a sign change of the
/// exact polynomial and returns the one with the smaller `|p|`. `None` when
/// no bracket is found nearby.
fn bisect_exact(p: &[Rational], x: f64) -> Option<f64> {
    let ip = integer_coeffs(p);
    let scale = x.abs().max(1.0);
    let mut h = 1e-10 * scale;
    let mut bracket = None;
    for _ in 0..6 {
        let (lo, hi) = (x - h, x + h);
        let (sl, sh) = (sign_at(&ip, lo), sign_at(&ip, hi));
        if sl == Ordering::Equal {
            return Some(lo);
        }
        if sh == Ordering::Equal {
            return Some(hi);
        }
        if sl != sh {
            bracket = Some((lo, hi, sl));
            break;
        }
        h *= 8.0;
    }
    let (mut lo, mut hi, sl) = bracket?;
    loop {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        match sign_at(&ip, mid) {
            Ordering::Equal => return Some(mid),
            s if s == sl => lo = mid,
            _ => hi = mid,
        }
    }
    Some(if abs_at(p, lo) <= abs_at(p, hi) { lo } else { hi })
}

fn monic_gcd(a: &Poly<Rational>, b: &Poly<Rational>) -> Poly<Rational> {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.div_rem(&b).expect("nonzero divisor").1;
        a = b;
        b = r;
    }
    let lead = a.leading();
    a.scale(&(Rational::from_i64(1) / lead))
}

fn exact_div(a: &Poly<Rational>, b: &Poly<Rational>) -> Poly<Rational> {
    a.div_rem(b).expect("nonzero divisor").0
}

/// Yun's square-free decomposition: `p = c Π f_k^k` with each `f_k`
/// square-free and pairwise coprime. Returns the nonconstant `(f_k, k)`.
fn squarefree(p: &Poly<Rational>) -> Vec<(Poly<Rational>, usize)> {
    let dp = p.derivative();
    let a0 = monic_gcd(p, &dp);
    let mut b = exact_div(p, &a0);
    let mut d = exact_div(&dp, &a0) - b.derivative();
    let mut out = Vec::new();
    let mut k = 1;
    while b.degree().is_some_and(|n| n > 0) {
        let a = monic_gcd(&b, &d);
        let next = exact_div(&b, &a);
        let c = exact_div(&d, &a);
        d = c - next.derivative();
        if a.degree().is_some_and(|n| n > 0) {
            out.push((a, k));
        }
        b = next;
        k += 1;
    }
    out
}

/// Companion eigenvalues, Newton polish, and the realness cut. Real roots are
/// refined by exact bisection when `exact` is given.
fn simple_roots(c: &[Complex64], exact: Option<&[Rational]>) -> Result<Vec<Complex64>> {
    let deg = c.len() - 1;
    let mut zs = companion_roots(c);
    if zs.len() != deg {
        return Err(MopError::NonConverged { index: zs.len() });
    }
    for z in &mut zs {
        let start = (*z, horner(c, *z).0.norm());
        for _ in 0..50 {
            let (v, dv) = horner(c, *z);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            *z -= step;
            if step.norm() <= f64::EPSILON * z.norm().max(1.0) {
                break;
            }
        }
        if !(horner(c, *z).0.norm() <= start.1) {
            *z = start.0;
        }
    }
    for z in &mut zs {
        if z.im.abs() < ROOT_CLUSTER * z.norm().max(1.0) {
            z.im = 0.0;
            if let Some(x) = exact.and_then(|e| bisect_exact(e, z.re)) {
                z.re = x;
            }
        }
    }
    Ok(zs)
}

fn by_position(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Roots of `p` (degree ≥ 1): balanced companion eigenvalues and Newton
/// polish on the original coefficients.
///
/// With rational coefficients and degree at most 12, multiplicities come
/// from an exact square-free decomposition and real roots are refined by
/// exact sign bisection. Otherwise roots within `1e-8` (relative) are
/// clustered.
pub fn roots<T: Scalar>(p: &Poly<T>) -> Result<RootSet> {
    let deg = p.degree().filter(|&d| d >= 1).ok_or_else(|| MopError::Usage("roots needs degree ≥ 1".into()))?;
    let c: Vec<Complex64> = p.coeffs().iter().map(Scalar::to_complex).collect();
    let exact: Option<Vec<Rational>> =
        if deg <= BISECT_MAX_DEGREE { p.coeffs().iter().map(Scalar::to_rational).collect() } else { None };
    let tol = ROOT_CLUSTER;
    let mut values: Vec<Complex64> = Vec::new();
    let mut multiplicity: Vec<usize> = Vec::new();
    if let Some(e) = exact {
        let mut found: Vec<(Complex64, usize)> = Vec::new();
        for (f, k) in squarefree(&Poly::new(e)) {
            let fc: Vec<Complex64> = f.coeffs().iter().map(Scalar::to_complex).collect();
            found.extend(simple_roots(&fc, Some(f.coeffs()))?.into_iter().map(|z| (z, k)));
        }
        found.sort_by(|a, b| by_position(&a.0, &b.0));
        (values, multiplicity) = found.into_iter().unzip();
    } else {
        let mut zs = simple_roots(&c, None)?;
        zs.sort_by(by_position);
        let mut sums: Vec<Complex64> = Vec::new();
        for z in zs {
            match values.last() {
                Some(last) if (z - last).norm() <= tol * z.norm().max(1.0) => {
                    let k = multiplicity.len() - 1;
                    multiplicity[k] += 1;
                    sums[k] += z;
                    values[k] = sums[k] / multiplicity[k] as f64;
                }
                _ => {
                    values.push(z);
                    multiplicity.push(1);
                    sums.push(z);
                }
            }
        }
    }
    let mut residuals = Vec::with_capacity(values.len());
    for (i, (z, m)) in values.iter().zip(&multiplicity).enumerate() {
        let r = horner(&c, *z).0.norm();
        let scale = eval_scale(&c, *z);
        // a cluster of multiplicity m only pins P(z) to about eps^(1/m)
        let allowed = (1e-10_f64.powf(1.0 / *m as f64) * scale).max(1e3 * f64::EPSILON * scale);
        if r > allowed && r > 1e-300 {
            return Err(MopError::NonConverged { index: i });
        }
        residuals.push(r);
    }
    let real = values.iter().all(|z| z.im == 0.0);
    Ok(RootSet { values, multiplicity, residuals, real, cluster_tolerance: tol })
}

/// Minimum gap between consecutive real roots (0 for a repeated root).
pub fn mesh(u: &RootSet) -> Result<f64> {
    if !u.real || u.len() < 2 {
        return Err(MopError::Usage("mesh needs at least two real roots".into()));
    }
    let x = u.reals();
    Ok(x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_and_linear() {
        let p = Poly::new(vec![2.0, -4.0, 1.0]);
        let r = roots(&p).unwrap();
        let s = 2f64.sqrt();
        assert!((r.values[0].re - (2.0 - s)).abs() < 1e-14);
        assert!((r.values[1].re - (2.0 + s)).abs() < 1e-14);
        assert!(r.real);
        let z = roots(&Poly::linear(3.5)).unwrap();
        assert_eq!(z.values, vec![Complex64::new(3.5, 0.0)]);
    }

    #[test]
    fn exact_bisection_and_clusters() {
        let q = |v: i64| <Rational as Scalar>::from_i64(v);
        // (x - 1/3)(x - 7)(x + 2)
        let p = Poly::from_roots(&[(Rational::new(1.into(), 3.into()), 1), (q(7), 1), (q(-2), 1)]);
        let r = roots(&p).unwrap();
        assert_eq!(r.reals(), vec![-2.0, 1.0 / 3.0, 7.0]);
        let d = roots(&Poly::from_roots(&[(q(2), 2), (q(5), 1)])).unwrap();
        assert_eq!(d.multiplicity, vec![2, 1]);
        assert!(!d.is_simple());
        assert_eq!(mesh(&d).unwrap(), 0.0);
    }

    #[test]
    fn complex_roots() {
        let r = roots(&Poly::new(vec![1.0, 0.0, 1.0])).unwrap();
        assert!(!r.real);
        assert!((r.values[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        let m = roots(&Poly::new(vec![0.0, 1.5, -1.0])).unwrap();
        assert_eq!(mesh(&m).unwrap(), 1.5);
    }
}
