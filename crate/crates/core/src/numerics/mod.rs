//! Scalar backends, dense polynomials and small dense linear algebra.

pub mod matrix;
pub mod poly;
pub mod scalar;
pub mod tol;

pub use matrix::{DenseMatrix, Determinant};
pub use poly::{BiPoly, Poly};
pub use scalar::{format_rational, parse_rational, rational_to_f64, Backend, Rational, Scalar};

/// Multi-index: one non-negative entry per functional.
pub type MultiIndex = Vec<usize>;

pub fn index_len(n: &[usize]) -> usize {
    n.iter().sum()
}

/// `n + e_j`.
pub fn plus(n: &[usize], j: usize) -> MultiIndex {
    let mut m = n.to_vec();
    m[j] += 1;
    m
}

/// `n - e_j`, `None` when `n_j = 0`.
pub fn minus(n: &[usize], j: usize) -> Option<MultiIndex> {
    if n[j] == 0 {
        return None;
    }
    let mut m = n.to_vec();
    m[j] -= 1;
    Some(m)
}

/// Step-line path from `0` to `n`, cycling through the axes in order.
///
/// Returns the sequence of axes; axes already at their target are skipped.
pub fn step_line_axes(n: &[usize]) -> Vec<usize> {
    let mut cur = vec![0; n.len()];
    let mut out = Vec::with_capacity(index_len(n));
    while cur != n {
        for j in 0..n.len() {
            if cur[j] < n[j] {
                cur[j] += 1;
                out.push(j);
            }
        }
    }
    out
}

/// All multi-indices of length `r` with `|n| = d` and `n <= cap`, in lexicographically descending order.
pub fn level_set(r: usize, d: usize, cap: &[usize]) -> Vec<MultiIndex> {
    fn rec(r: usize, d: usize, cap: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        let j = prefix.len();
        if j + 1 == r {
            if d <= cap[j] {
                prefix.push(d);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for v in (0..=d.min(cap[j])).rev() {
            prefix.push(v);
            rec(r, d - v, cap, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if r > 0 {
        rec(r, d, cap, &mut Vec::with_capacity(r), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_line_cycles() {
        assert_eq!(step_line_axes(&[2, 1]), vec![0, 1, 0]);
        assert_eq!(step_line_axes(&[0, 3]), vec![1, 1, 1]);
    }

    #[test]
    fn level_sets_respect_caps() {
        assert_eq!(level_set(2, 2, &[9, 9]), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(level_set(2, 2, &[1, 9]), vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(level_set(3, 1, &[5, 5, 5]).len(), 3);
    }
}
