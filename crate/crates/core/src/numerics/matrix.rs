use super::scalar::Scalar;
use super::tol::{ILL_CONDITIONED, PIVOT_TOL};
use crate::error::{MopError, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Determinant together with a conditioning hint (always `false` on exact backends).
#[derive(Debug, Clone, PartialEq)]
pub struct Determinant<T> {
    pub value: T,
    pub ill_conditioned: bool,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MopError::Usage("ragged matrix rows".into()));
        }
        Ok(DenseMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    fn scale(&self) -> f64 {
        self.data.iter().map(|v| v.abs_f64()).fold(0.0, f64::max)
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(MopError::Usage(format!(
                "matrix is {}x{}, expected square",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Solves `A x = b`.
    ///
    /// Exact backends use fraction-free (Bareiss) elimination; float backends
    /// use partial pivoting and report a singular pivot below
    /// `PIVOT_TOL` times the largest entry.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        self.require_square()?;
        if rhs.len() != self.rows {
            return Err(MopError::Usage("right-hand side length mismatch".into()));
        }
        let n = self.rows;
        let w = n + 1;
        let mut a: Vec<T> = Vec::with_capacity(n * w);
        for i in 0..n {
            a.extend(self.data[i * n..(i + 1) * n].iter().cloned());
            a.push(rhs[i].clone());
        }
        let (_, _) = eliminate(&mut a, n, w, self.scale())?;
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut acc = a[i * w + n].clone();
            for j in i + 1..n {
                acc = acc - a[i * w + j].clone() * x[j].clone();
            }
            x[i] = acc / a[i * w + i].clone();
        }
        Ok(x)
    }

    pub fn determinant(&self) -> Result<Determinant<T>> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(Determinant { value: T::one(), ill_conditioned: false });
        }
        let mut a = self.data.clone();
        match eliminate(&mut a, n, n, self.scale()) {
            Ok((sign, min_ratio)) => {
                let value = if T::EXACT {
                    // Bareiss leaves the determinant in the last pivot.
                    a[n * n - 1].clone()
                } else {
                    (0..n).fold(T::one(), |acc, i| acc * a[i * n + i].clone())
                };
                let value = if sign < 0 { -value } else { value };
                Ok(Determinant { value, ill_conditioned: !T::EXACT && min_ratio < ILL_CONDITIONED })
            }
            Err(MopError::Singular { .. }) => {
                Ok(Determinant { value: T::zero(), ill_conditioned: !T::EXACT })
            }
            Err(e) => Err(e),
        }
    }
}

/// Forward elimination on the first `n` columns of an `n x w` array.
///
/// Returns the permutation sign and the smallest pivot ratio seen.
fn eliminate<T: Scalar>(a: &mut [T], n: usize, w: usize, scale: f64) -> Result<(i32, f64)> {
    let mut sign = 1;
    let mut min_ratio = f64::INFINITY;
    let mut prev = T::one();
    for k in 0..n {
        let pivot_row = if T::EXACT {
            (k..n).find(|&i| !a[i * w + k].is_zero())
        } else {
            (k..n)
                .max_by(|&i, &j| a[i * w + k].abs_f64().total_cmp(&a[j * w + k].abs_f64()))
                .filter(|&i| a[i * w + k].abs_f64() > PIVOT_TOL * scale)
        };
        let Some(p) = pivot_row else {
            return Err(MopError::Singular { pivot: k });
        };
        if p != k {
            for j in 0..w {
                a.swap(k * w + j, p * w + j);
            }
            sign = -sign;
        }
        let piv = a[k * w + k].clone();
        if !T::EXACT && scale > 0.0 {
            min_ratio = min_ratio.min(piv.abs_f64() / scale);
        }
        for i in k + 1..n {
            let f = a[i * w + k].clone();
            if T::EXACT {
                for j in k + 1..w {
                    let v = (piv.clone() * a[i * w + j].clone() - f.clone() * a[k * w + j].clone())
                        / prev.clone();
                    a[i * w + j] = v;
                }
            } else {
                let m = f / piv.clone();
                for j in k + 1..w {
                    let v = a[i * w + j].clone() - m.clone() * a[k * w + j].clone();
                    a[i * w + j] = v;
                }
            }
            a[i * w + k] = T::zero();
        }
        if T::EXACT {
            prev = piv;
        }
    }
    Ok((sign, min_ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn hankel_solve_for_charlier_p2() {
        // Moments 1,1,2,5 give P_2 = x^2 - 3x + 1.
        let m = DenseMatrix::from_rows(vec![vec![q(1), q(1)], vec![q(1), q(2)]]).unwrap();
        let x = m.solve(&[-q(2), -q(5)]).unwrap();
        assert_eq!(x, vec![q(1), q(-3)]);
    }

    #[test]
    fn singular_exact() {
        let m = DenseMatrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]).unwrap();
        assert!(matches!(m.solve(&[q(1), q(1)]), Err(MopError::Singular { pivot: 1 })));
        assert_eq!(m.determinant().unwrap().value, q(0));
    }

    #[test]
    fn bareiss_determinant_with_pivoting() {
        let m = DenseMatrix::from_rows(vec![
            vec![q(0), q(2), q(1)],
            vec![q(3), q(1), q(4)],
            vec![q(1), q(5), q(9)],
        ])
        .unwrap();
        // 0*(9-20) - 2*(27-4) + 1*(15-1)
        assert_eq!(m.determinant().unwrap().value, q(-32));
    }

    #[test]
    fn float_determinant_and_solve() {
        let m = DenseMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let d = m.determinant().unwrap();
        assert!((d.value - 5.0f64).abs() < 1e-14);
        assert!(!d.ill_conditioned);
        let x = m.solve(&[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn non_square_rejected() {
        let m = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(m.determinant(), Err(MopError::Usage(_))));
    }
}
