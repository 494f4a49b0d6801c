//! Gauss rules from Jacobi matrices (Golub–Welsch) and the discretized
//! Stieltjes procedure.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a discrete measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Discretization {
    pub fn moment(&self, n: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x.powi(n as i32))
            .sum()
    }

    /// Multiplies every weight by `f(node)`.
    pub fn reweighted(&self, f: impl Fn(f64) -> f64) -> Self {
        Discretization {
            nodes: self.nodes.clone(),
            weights: self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).collect(),
        }
    }
}

/// Gauss rule for the measure whose monic recurrence is `b`, `a` (with `a[0]` unused) and total mass `mu0`.
pub fn golub_welsch(b: &[f64], a: &[f64], mu0: f64) -> Discretization {
    let n = b.len();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = b[i];
        if i + 1 < n {
            let off = a[i + 1].sqrt();
            t[(i, i + 1)] = off;
            t[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Discretization {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `m`-point Gauss–Jacobi rule for `(1-t)^alpha (1+t)^beta` on `[-1, 1]`.
pub fn gauss_jacobi(m: usize, alpha: f64, beta: f64) -> Discretization {
    let ab = alpha + beta;
    let mut b = vec![0.0; m];
    let mut a = vec![0.0; m];
    b[0] = (beta - alpha) / (ab + 2.0);
    for n in 1..m {
        let nf = n as f64;
        let s = 2.0 * nf + ab;
        b[n] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
        a[n] = if n == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * nf * (nf + alpha) * (nf + beta) * (nf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
        .exp();
    golub_welsch(&b, &a, mu0)
}

/// `m`-point generalized Gauss–Laguerre rule for `x^g e^{-x}` on `[0, ∞)`.
pub fn gauss_laguerre(m: usize, g: f64) -> Discretization {
    let b: Vec<f64> = (0..m).map(|n| 2.0 * n as f64 + g + 1.0).collect();
    let a: Vec<f64> = (0..m).map(|n| n as f64 * (n as f64 + g)).collect();
    golub_welsch(&b, &a, ln_gamma(g + 1.0).exp())
}

/// Affine image of a rule on `[-1, 1]` onto `[lo, hi]`, including the Jacobian.
pub fn map_interval(d: &Discretization, lo: f64, hi: f64) -> Discretization {
    let h = 0.5 * (hi - lo);
    Discretization {
        nodes: d.nodes.iter().map(|t| lo + h * (t + 1.0)).collect(),
        weights: d.weights.iter().map(|w| w * h).collect(),
    }
}

/// Monic recurrence coefficients `(b_0..b_{L-1}, a_0..a_{L-1})` of a discrete measure.
///
/// Weights may be signed; vectors are rescaled each step so that only
/// ratios enter. Returns fewer than `len` terms if a norm vanishes.
pub fn stieltjes(d: &Discretization, len: usize) -> (Vec<f64>, Vec<f64>) {
    let m = d.nodes.len();
    let mut b = Vec::with_capacity(len);
    let mut a = Vec::with_capacity(len);
    let mut p_prev = vec![0.0; m];
    let mut p = vec![1.0; m];
    let mut norm_prev = 1.0;
    for n in 0..len.min(m) {
        let norm: f64 = (0..m).map(|i| d.weights[i] * p[i] * p[i]).sum();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        let xnorm: f64 = (0..m).map(|i| d.weights[i] * d.nodes[i] * p[i] * p[i]).sum();
        let bn = xnorm / norm;
        let an = if n == 0 { 0.0 } else { norm / norm_prev };
        b.push(bn);
        a.push(an);
        let next: Vec<f64> = (0..m).map(|i| (d.nodes[i] - bn) * p[i] - an * p_prev[i]).collect();
        let s = next.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let s = if s > 0.0 { s } else { 1.0 };
        p_prev = p.iter().map(|v| v / s).collect();
        p = next.iter().map(|v| v / s).collect();
        norm_prev = norm / (s * s);
    }
    (b, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let g = gauss_jacobi(10, 0.0, 0.0);
        assert!((g.moment(0) - 2.0).abs() < 1e-14);
        assert!((g.moment(2) - 2.0 / 3.0).abs() < 1e-14);
        assert!((g.moment(18) - 2.0 / 19.0).abs() < 1e-14);
        assert!(g.moment(7).abs() < 1e-14);
    }

    #[test]
    fn jacobi_rule_with_singular_endpoints() {
        // ∫_{-1}^{1} (1-t)^{-1/2} (1+t)^{1/2} dt = π
        let g = gauss_jacobi(20, -0.5, 0.5);
        assert!((g.moment(0) - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn laguerre_rule_moments() {
        let g = gauss_laguerre(30, 0.0);
        assert!((g.moment(5) - 120.0).abs() < 1e-9);
    }

    #[test]
    fn stieltjes_recovers_legendre() {
        let g = gauss_jacobi(60, 0.0, 0.0);
        let (b, a) = stieltjes(&g, 10);
        for n in 1..10 {
            let nf = n as f64;
            assert!(b[n].abs() < 1e-13);
            assert!((a[n] - nf * nf / (4.0 * nf * nf - 1.0)).abs() < 1e-13);
        }
    }
}
