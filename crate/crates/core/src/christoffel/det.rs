use std::collections::BTreeMap;

use crate::error::{MopError, Result};
use crate::functionals::MopSystem;
use crate::lattice::{type1_solve, Type2Table, TypeIVector};
use crate::numerics::tol::EPS_BREAKDOWN;
use crate::numerics::{index_len, minus, plus, DenseMatrix, MultiIndex, Poly, Scalar};

use super::TransformSpec;

fn poly_scale<T: Scalar>(p: &Poly<T>, z: &T) -> f64 {
    let az = z.abs_f64().max(1.0);
    p.coeffs().iter().rev().fold(0.0, |acc, c| acc * az + c.abs_f64())
}

/// `(p - p(z)/q(z) q) / (x - z)`, the exact quotient.
fn divide_linear<T: Scalar>(p: &Poly<T>, z: &T) -> Poly<T> {
    let (quot, _) = p.div_rem(&Poly::linear(z.clone())).expect("x - z is nonzero");
    quot
}

/// `P̂_k = [P_{k+e_j} - (P_{k+e_j}(z_0)/P_k(z_0)) P_k] / (x - z_0)`.
pub fn transform_type2_onestep<T: Scalar>(table: &Type2Table<T>, k: &[usize], j: usize, z0: &T) -> Result<Poly<T>> {
    let pk = table.require(k)?;
    let pkj = table.require(&plus(k, j))?;
    let at = pk.eval(z0);
    if at.is_negligible(poly_scale(pk, z0), EPS_BREAKDOWN) {
        return Err(MopError::RootHit { n: k.to_vec() });
    }
    let num = pkj.clone() - pk.scale(&(pkj.eval(z0) / at));
    Ok(divide_linear(&num, z0))
}

/// One-step transform of every `P_k` in the table with some `P_{k+e_j}` available
/// (smallest such `j`). Indices where `P_k(z_0) = 0` are left out.
pub fn onestep_table<T: Scalar>(table: &Type2Table<T>, z0: &T) -> Type2Table<T> {
    let mut out = BTreeMap::new();
    for (k, _) in table.iter() {
        let Some(j) = (0..k.len()).find(|&j| table.get(&plus(k, j)).is_some()) else { continue };
        if let Ok(p) = transform_type2_onestep(table, k, j, z0) {
            out.insert(k.clone(), p);
        }
    }
    Type2Table::from_polys(out)
}

/// Distinct orderings of `items`, starting with the given order.
fn orderings<T: Clone + PartialEq>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out: Vec<Vec<T>> = Vec::new();
    for i in 0..items.len() {
        if items[..i].contains(&items[i]) {
            continue;
        }
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in orderings(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Largest `deg Φ` for which every root order is tried.
const MAX_ORDERED_DEGREE: usize = 4;

/// `P̂` for `Φν` by one-step transforms at each root of `Φ` in turn.
///
/// An intermediate system can be non-normal where `Φν` is normal. Each
/// index therefore takes its value from the first root order (canonical
/// order first) that reaches it. Orders are only tried up to degree 4.
pub fn transform_type2_iterated<T: Scalar>(table: &Type2Table<T>, t: &TransformSpec<T>) -> Type2Table<T> {
    let roots = t.root_list();
    let orders = if roots.len() <= MAX_ORDERED_DEGREE { orderings(&roots) } else { vec![roots] };
    let mut out: BTreeMap<MultiIndex, Poly<T>> = BTreeMap::new();
    for order in orders {
        let got = order.iter().fold(table.clone(), |acc, z| onestep_table(&acc, z));
        for (k, p) in got.iter() {
            out.entry(k.clone()).or_insert_with(|| p.clone());
        }
    }
    Type2Table::from_polys(out)
}

/// Default shifts `s_0 = 0, …, s_len`: step `i` adds `e_{(i-1) mod r}`.
pub fn step_line_shifts(r: usize, len: usize) -> Vec<MultiIndex> {
    let mut out = vec![vec![0; r]];
    for i in 0..len {
        let next = plus(out.last().expect("nonempty"), i % r);
        out.push(next);
    }
    out
}

/// Rows `p^{(d)}(z)` for every root `z` and `d < mult`.
fn root_rows<T: Scalar>(t: &TransformSpec<T>) -> Vec<(T, usize)> {
    t.roots().iter().flat_map(|(z, m)| (0..*m).map(move |d| (z.clone(), d))).collect()
}

fn eval_d<T: Scalar>(p: &Poly<T>, z: &T, d: usize) -> T {
    if d == 0 {
        p.eval(z)
    } else {
        p.nth_derivative(d).eval(z)
    }
}

/// The determinant and its scale: the product of the row maxima and of the
/// column maxima of the row-equilibrated matrix.
fn det_of<T: Scalar>(rows: Vec<Vec<T>>) -> Result<(T, f64)> {
    let row_max: Vec<f64> =
        rows.iter().map(|row| row.iter().map(Scalar::abs_f64).fold(0.0, f64::max).max(f64::MIN_POSITIVE)).collect();
    let cols = rows.first().map_or(0, Vec::len);
    let col_max = (0..cols).map(|c| rows.iter().zip(&row_max).map(|(row, m)| row[c].abs_f64() / m).fold(0.0, f64::max));
    let scale = row_max.iter().product::<f64>() * col_max.product::<f64>();
    Ok((DenseMatrix::from_rows(rows)?.determinant()?.value, scale))
}

/// Cauchy bound on the moduli of the roots of `phi`.
fn root_radius<T: Scalar>(phi: &Poly<T>) -> f64 {
    let c = phi.coeffs();
    let lead = c.last().map_or(1.0, Scalar::abs_f64);
    1.0 + c[..c.len() - 1].iter().map(|v| v.abs_f64() / lead).fold(0.0, f64::max)
}

/// `det [first; body]` expanded along the polynomial first row, with the
/// summed size of the expansion terms on the disc of radius `radius`.
fn bordered<T: Scalar>(first: &[Poly<T>], body: &[Vec<T>], radius: f64) -> Result<(Poly<T>, f64)> {
    let n = first.len();
    let disc = T::from_f64(radius);
    let mut size = 0.0;
    let mut acc = Poly::zero();
    for c in 0..n {
        if first[c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<T>> =
            body.iter().map(|row| row.iter().enumerate().filter(|(i, _)| *i != c).map(|(_, v)| v.clone()).collect()).collect();
        let m = if minor.is_empty() { T::one() } else { det_of(minor)?.0 };
        let term = first[c].scale(&m);
        size += disc.as_ref().map_or(0.0, |z| poly_scale(&term, z));
        acc = if c % 2 == 0 { acc + term } else { acc - term };
    }
    Ok((acc, size))
}

/// Divides by `Φ`, checking that the remainder is negligible against `size`.
fn divide_phi<T: Scalar>(p: &Poly<T>, size: f64, phi: &Poly<T>, k: &[usize]) -> Result<Poly<T>> {
    let (q, rem) = p.div_rem(phi).expect("Φ is nonzero");
    if !rem.coeffs().iter().all(|c| c.is_negligible(size.max(1.0), 1e-8)) {
        return Err(MopError::DegenerateD { n: k.to_vec() });
    }
    Ok(q)
}

/// `P̂_k` from the bordered determinant of `P_{k+s_m}, …, P_k` at the roots of
/// `Φ` (derivative rows for repeated roots), divided by `Φ D_k`.
///
/// Where `P_{k+s_i}` is not available (finite support), `x^{i-i_0} P_{k+s_{i_0}}`
/// with the last available `i_0 < i` is used instead.
pub fn transform_type2_det<T: Scalar>(
    table: &Type2Table<T>,
    k: &[usize],
    t: &TransformSpec<T>,
    shifts: Option<&[MultiIndex]>,
) -> Result<Poly<T>> {
    let m = t.degree();
    let shifts = match shifts {
        Some(s) => s.to_vec(),
        None => step_line_shifts(k.len(), m),
    };
    if shifts.len() != m + 1 || shifts.iter().enumerate().any(|(i, s)| index_len(s) != i || s.len() != k.len()) {
        return Err(MopError::Usage("shifts must be s_0 = 0, …, s_m with |s_i| = i".into()));
    }
    let base = table.require(k)?.clone();
    let mut cols = vec![base];
    let mut last = 0;
    for (i, s) in shifts.iter().enumerate().skip(1) {
        let idx: MultiIndex = k.iter().zip(s).map(|(a, b)| a + b).collect();
        match table.get(&idx) {
            Some(p) if last + 1 == i => {
                cols.push(p.clone());
                last = i;
            }
            _ => {
                let mut p = cols[last].clone();
                for _ in last..i {
                    p = p.mul_x();
                }
                cols.push(p);
            }
        }
    }
    cols.reverse();
    let body: Vec<Vec<T>> = root_rows(t).iter().map(|(z, d)| cols.iter().map(|p| eval_d(p, z, *d)).collect()).collect();
    let d_rows: Vec<Vec<T>> = body.iter().map(|r| r[1..].to_vec()).collect();
    let (d, scale) = det_of(d_rows)?;
    if d.is_negligible(scale, EPS_BREAKDOWN) {
        return Err(MopError::DegenerateD { n: k.to_vec() });
    }
    let phi = t.phi();
    let (det, size) = bordered(&cols, &body, root_radius(&phi))?;
    Ok(divide_phi(&det, size, &phi, k)?.scale(&(T::one() / d)))
}

fn typei_cols<T: Scalar>(
    sys: &MopSystem<T>,
    k: &[usize],
    shifts: &[MultiIndex],
) -> Result<Vec<TypeIVector<T>>> {
    shifts
        .iter()
        .map(|s| {
            let idx: MultiIndex = k.iter().zip(s).map(|(a, b)| a + b).collect();
            type1_solve(sys, &idx)
        })
        .collect()
}

/// Shared core of both type I formulas: columns `A_{c}`, rows at the roots.
fn typei_bordered<T: Scalar>(
    k: &[usize],
    cols: &[TypeIVector<T>],
    rows: &[(T, usize)],
    divisor: &Poly<T>,
) -> Result<TypeIVector<T>> {
    let r = k.len();
    let mut body = Vec::new();
    for (z, d) in rows {
        for i in 0..r {
            body.push(cols.iter().map(|c| eval_d(&c.polys[i], z, *d)).collect::<Vec<T>>());
        }
    }
    let d_rows: Vec<Vec<T>> = body.iter().map(|row| row[1..].to_vec()).collect();
    let (d, scale) = det_of(d_rows)?;
    if d.is_negligible(scale, EPS_BREAKDOWN) {
        return Err(MopError::DegenerateD { n: k.to_vec() });
    }
    let inv = T::one() / d;
    let polys = (0..r)
        .map(|j| {
            let first: Vec<Poly<T>> = cols.iter().map(|c| c.polys[j].clone()).collect();
            let (det, size) = bordered(&first, &body, root_radius(divisor))?;
            Ok(divide_phi(&det, size, divisor, k)?.scale(&inv))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TypeIVector { n: k.to_vec(), polys, normalized: true })
}

/// `Â_k` for `Φν` from the `((r-1)m + 1)`-size bordered determinant over
/// `A_k, A_{k+s_1}, …, A_{k+s_{(r-1)m}}` with `s_i ≤ m·1`.
pub fn transform_type1_det<T: Scalar>(
    sys: &MopSystem<T>,
    k: &[usize],
    t: &TransformSpec<T>,
    shifts: Option<&[MultiIndex]>,
) -> Result<TypeIVector<T>> {
    let r = sys.rank();
    let m = t.degree();
    if index_len(k) == 0 {
        return Ok(TypeIVector::zero(r));
    }
    let shifts = match shifts {
        Some(s) => s.to_vec(),
        None => step_line_shifts(r, r * m),
    };
    let valid = shifts.len() == r * m + 1
        && shifts.iter().enumerate().all(|(i, s)| s.len() == r && index_len(s) == i && s.iter().all(|&v| v <= m));
    if !valid {
        return Err(MopError::Usage("type I shifts must satisfy |s_i| = i and s_i ≤ m·1".into()));
    }
    let cols = typei_cols(sys, k, &shifts)?;
    typei_bordered(k, &cols, &root_rows(t), &t.phi())
}

/// `Â_k` for `(x - z_0)ν` from the nearest-neighbour columns
/// `A_k, A_{k+e_1}, …, A_{k+e_{r-1}}`.
pub fn transform_type1_onestep<T: Scalar>(sys: &MopSystem<T>, k: &[usize], z0: &T) -> Result<TypeIVector<T>> {
    let r = sys.rank();
    if index_len(k) == 0 {
        return Ok(TypeIVector::zero(r));
    }
    let mut shifts = vec![vec![0; r]];
    shifts.extend((0..r).map(|j| plus(&vec![0; r], j)));
    let cols = typei_cols(sys, k, &shifts)?;
    typei_bordered(k, &cols, &[(z0.clone(), 0)], &Poly::linear(z0.clone()))
}

/// `A_k - Â_{k-e_j} = δ Â_k`: returns `(δ, residual)` with `δ` fitted on the
/// largest coefficient of `Â_k`.
pub fn type1_two_term<T: Scalar>(sys: &MopSystem<T>, k: &[usize], j: usize, z0: &T) -> Result<(T, f64)> {
    let kj = minus(k, j).ok_or_else(|| MopError::Usage(format!("{k:?} has k_{j} = 0")))?;
    let ak = type1_solve(sys, k)?;
    let hat = transform_type1_onestep(sys, k, z0)?;
    let hat_down = transform_type1_onestep(sys, &kj, z0)?;
    let lhs = ak.axpy(&-T::one(), &hat_down);
    let (mut best, mut at) = (0.0, None);
    for (i, p) in hat.polys.iter().enumerate() {
        for (t, c) in p.coeffs().iter().enumerate() {
            if c.abs_f64() > best {
                best = c.abs_f64();
                at = Some((i, t));
            }
        }
    }
    let (i, t) = at.ok_or_else(|| MopError::DegenerateD { n: k.to_vec() })?;
    let delta = lhs.polys[i].coeff(t) / hat.polys[i].coeff(t);
    Ok((delta.clone(), lhs.axpy(&-delta, &hat).max_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FamilySpec;
    use crate::lattice::{lattice_for_system, type2_oracle};
    use crate::numerics::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn laguerre_table(dmax: usize) -> Type2Table<Rational> {
        let sys = MopSystem::from_family(FamilySpec::Laguerre1 { alphas: vec![q(0)] }).unwrap();
        Type2Table::build(&lattice_for_system(&sys, dmax).unwrap(), None)
    }

    #[test]
    fn distinct_orderings() {
        assert_eq!(orderings(&[5, 5, 7]), vec![vec![5, 5, 7], vec![5, 7, 5], vec![7, 5, 5]]);
        assert_eq!(orderings(&[1, 2]).len(), 2);
    }

    #[test]
    fn onestep_laguerre_hand_example() {
        let table = laguerre_table(4);
        assert_eq!(transform_type2_onestep(&table, &[0], 0, &q(0)).unwrap(), Poly::one());
        // (x² - 4x + 2 + 2(x - 1)) / x = x - 2
        assert_eq!(transform_type2_onestep(&table, &[1], 0, &q(0)).unwrap(), Poly::new(vec![q(-2), q(1)]));
    }

    #[test]
    fn det_reduces_to_onestep_and_classical_formula() {
        let table = laguerre_table(8);
        let t1 = TransformSpec::from_roots(vec![q(0)], 5).unwrap();
        for n in 0..5 {
            assert_eq!(
                transform_type2_det(&table, &[n], &t1, None).unwrap(),
                transform_type2_onestep(&table, &[n], 0, &q(0)).unwrap()
            );
        }
        let x2 = TransformSpec::new(vec![(q(0), 2)], None, 5).unwrap();
        let sys2 = MopSystem::from_family(FamilySpec::Laguerre1 { alphas: vec![q(2)] }).unwrap();
        for n in 0..=5 {
            assert_eq!(transform_type2_det(&table, &[n], &x2, None).unwrap(), type2_oracle(&sys2, &[n]).unwrap());
        }
    }

    #[test]
    fn charlier_onestep_j_independent_and_type1() {
        let sys = MopSystem::from_family(FamilySpec::Charlier { a: vec![q(1), q(2)] }).unwrap();
        let table = Type2Table::build(&lattice_for_system(&sys, 6).unwrap(), None);
        let z = q(5);
        let p0 = transform_type2_onestep(&table, &[1, 1], 0, &z).unwrap();
        assert_eq!(p0, transform_type2_onestep(&table, &[1, 1], 1, &z).unwrap());
        let hat = sys.modified(&Poly::linear(z.clone())).unwrap();
        assert_eq!(p0, type2_oracle(&hat, &[1, 1]).unwrap());
        let t = TransformSpec::from_roots(vec![z.clone()], 4).unwrap();
        for k in [[1, 0], [1, 1], [2, 1]] {
            let want = type1_solve(&hat, &k).unwrap();
            assert_eq!(transform_type1_det(&sys, &k, &t, None).unwrap().polys, want.polys);
            assert_eq!(transform_type1_onestep(&sys, &k, &z).unwrap().polys, want.polys);
        }
        let (delta, res) = type1_two_term(&sys, &[2, 1], 0, &z).unwrap();
        assert!(!delta.is_zero());
        assert_eq!(res, 0.0);
    }
}
