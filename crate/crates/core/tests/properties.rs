use std::sync::Arc;

use proptest::prelude::*;

use mopchr::christoffel::{transform_nnrr, TransformSpec};
use mopchr::functionals::{FamilySpec, MomentFunctional, MopSystem, Support};
use mopchr::lattice::{
    inner, lattice_for_system, nnr_cor_residual, oracle_a, oracle_b, type2_oracle, Type2Table,
};
use mopchr::numerics::{level_set, DenseMatrix, Poly, Rational, Scalar};
use mopchr::recurrence::{
    galant_one_step, jacobi_from_moment_slice, jacobi_from_moments, moments_from_jacobi, three_term_polys, JacobiData,
};
use mopchr::zeros::{interlace, roots};

fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=9).prop_map(|(p, d)| q(p, d))
}

fn positive() -> impl Strategy<Value = Rational> {
    (1i64..=20, 1i64..=6).prop_map(|(p, d)| q(p, d))
}

fn square(n: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    prop::collection::vec(prop::collection::vec(rational(), n), n)
}

fn cofactor(m: &[Vec<Rational>]) -> Rational {
    if m.is_empty() {
        return Rational::from_i64(1);
    }
    let mut acc = Rational::from_i64(0);
    for c in 0..m.len() {
        let minor: Vec<Vec<Rational>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(i, _)| *i != c).map(|(_, v)| v.clone()).collect()).collect();
        let term = m[0][c].clone() * cofactor(&minor);
        acc = if c % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

fn hankel(c: &[Rational], n: usize) -> Rational {
    let rows = (0..n).map(|i| (0..n).map(|j| c[i + j].clone()).collect()).collect();
    DenseMatrix::from_rows(rows).unwrap().determinant().unwrap().value
}

/// Discrete two-axis systems with random admissible parameters.
fn discrete_system() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        (positive(), positive())
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(a, b)| FamilySpec::Charlier { a: vec![a, b] }),
        ((1i64..=8, 1i64..=8), 1i64..=9)
            .prop_filter("distinct", |((c1, c2), _)| c1 != c2)
            .prop_map(|((c1, c2), b)| FamilySpec::Meixner1 { cs: vec![q(c1, 9), q(c2, 9)], beta: q(b, 3) }),
        ((1i64..=8, 1i64..=8), 4u32..=9)
            .prop_filter("distinct", |((p1, p2), _)| p1 != p2)
            .prop_map(|((p1, p2), n)| FamilySpec::Krawtchouk { n, ps: vec![q(p1, 9), q(p2, 9)] }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_solve_has_zero_residual(m in square(4), rhs in prop::collection::vec(rational(), 4)) {
        let a = DenseMatrix::from_rows(m.clone()).unwrap();
        prop_assume!(!a.determinant().unwrap().value.is_zero());
        let x = a.solve(&rhs).unwrap();
        for (row, b) in m.iter().zip(&rhs) {
            let lhs = row.iter().zip(&x).fold(Rational::from_i64(0), |s, (u, v)| s + u.clone() * v.clone());
            prop_assert_eq!(&lhs, b);
        }
    }

    #[test]
    fn elimination_det_equals_cofactor(n in 1usize..=5, seed in square(5)) {
        let m: Vec<Vec<Rational>> = seed[..n].iter().map(|r| r[..n].to_vec()).collect();
        let det = DenseMatrix::from_rows(m.clone()).unwrap().determinant().unwrap().value;
        prop_assert_eq!(det, cofactor(&m));
    }

    #[test]
    fn eval_of_product_is_product_of_evals(
        p in prop::collection::vec(rational(), 1..6),
        r in prop::collection::vec(rational(), 1..6),
        x in rational(),
    ) {
        let (p, r) = (Poly::new(p), Poly::new(r));
        prop_assert_eq!(p.mul(&r).eval(&x), p.eval(&x) * r.eval(&x));
    }

    #[test]
    fn nested_modification_matches_product(
        spec in discrete_system(),
        f1 in prop::collection::vec(rational(), 2..4),
        f2 in prop::collection::vec(rational(), 2..4),
    ) {
        let (p1, p2) = (Poly::new(f1), Poly::new(f2));
        prop_assume!(!p1.is_zero() && !p2.is_zero());
        let base = Arc::new(MomentFunctional::<Rational>::family(Arc::new(spec), 0).unwrap());
        let once = Arc::new(MomentFunctional::apply_polynomial(&base, p1.clone()).unwrap());
        let twice = MomentFunctional::apply_polynomial(&once, p2.clone()).unwrap();
        let product = MomentFunctional::apply_polynomial(&base, p1.mul(&p2)).unwrap();
        prop_assert_eq!(twice.moments(10).unwrap(), product.moments(10).unwrap());
    }

    #[test]
    fn hankel_determinants_nonzero_then_zero_past_support(spec in discrete_system()) {
        let f = MomentFunctional::<Rational>::family(Arc::new(spec), 1).unwrap();
        let c = f.moments(2 * 11).unwrap();
        let cap = match f.support() {
            Support::Finite(n) => n,
            Support::Infinite => usize::MAX,
        };
        for n in 1..=cap.min(8) {
            prop_assert!(!hankel(&c, n).is_zero(), "Δ_{} vanishes", n);
        }
        if cap < 10 {
            for n in cap + 1..=10 {
                prop_assert!(hankel(&c, n).is_zero(), "Δ_{} past the support", n);
            }
        }
    }

    #[test]
    fn jacobi_moments_roundtrip(
        b in prop::collection::vec(rational(), 1..=8),
        a in prop::collection::vec(positive(), 9),
        neg in prop::collection::vec(any::<bool>(), 9),
    ) {
        let len = b.len();
        let mut av = vec![Rational::from_i64(0)];
        av.extend(a.iter().zip(&neg).take(len).map(|(v, s)| if *s { -v.clone() } else { v.clone() }));
        let j = JacobiData::new(b, av, Rational::from_i64(1), Support::Infinite).unwrap();
        let c = moments_from_jacobi(&j, &Rational::from_i64(1), 2 * len + 1).unwrap();
        prop_assert_eq!(jacobi_from_moment_slice(&c, len).unwrap(), j);
    }

    #[test]
    fn galant_matches_modified_moments_and_delta(spec in discrete_system(), z in 1i64..=12, d in 1i64..=4) {
        // z0 < 0 lies left of every support, so no P_n vanishes there.
        let z0 = q(-z, d);
        let base = Arc::new(MomentFunctional::<Rational>::family(Arc::new(spec), 0).unwrap());
        let len = match base.support() { Support::Finite(n) => n.min(8) - 1, Support::Infinite => 8 };
        let j = jacobi_from_moments(&base, len + 1).unwrap();
        let g = galant_one_step(&j, &z0, len).unwrap();
        let modified = MomentFunctional::apply_polynomial(&base, Poly::linear(z0.clone())).unwrap();
        let direct = jacobi_from_moments(&modified, len).unwrap();
        prop_assert_eq!(&g.data.b[..len], &direct.b[..len]);
        prop_assert_eq!(&g.data.a[..len], &direct.a[..len]);
        let polys = three_term_polys(&j, len).unwrap();
        for n in 0..len {
            prop_assert_eq!(g.delta[n].clone(), polys[n + 1].eval(&z0) / polys[n].eval(&z0));
        }
    }

    #[test]
    fn three_term_polys_are_orthogonal(spec in discrete_system()) {
        let f = MomentFunctional::<Rational>::family(Arc::new(spec), 0).unwrap();
        let len = match f.support() { Support::Finite(n) => n.min(7), Support::Infinite => 7 };
        let j = jacobi_from_moments(&f, len).unwrap();
        let c = f.moments(2 * len + 2).unwrap();
        for (n, p) in three_term_polys(&j, len).unwrap().iter().enumerate() {
            for k in 0..n {
                prop_assert!(inner(p, k, &c).is_zero(), "<P_{}, x^{}> != 0", n, k);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cc_fill_matches_oracle_and_nnr_cor(spec in discrete_system()) {
        let sys = MopSystem::<Rational>::from_family(spec).unwrap();
        let lat = lattice_for_system(&sys, 5).unwrap();
        let table = Type2Table::build(&lat, None);
        for d in 0..=4 {
            for n in level_set(2, d, &lat.caps()) {
                if !lat.is_normal(&n) || type2_oracle(&sys, &n).is_err() {
                    continue;
                }
                for j in 0..2 {
                    if let (Some(a), Ok(o)) = (lat.a(&n, j), oracle_a(&sys, &n, j)) {
                        prop_assert_eq!(a, &o, "a at {:?}", n);
                    }
                    if let (Some(b), Ok(o)) = (lat.b(&n, j), oracle_b(&sys, &n, j)) {
                        prop_assert_eq!(b, &o, "b at {:?}", n);
                    }
                }
                if let Ok(res) = nnr_cor_residual(&table, &lat, &n, 0, 1) {
                    prop_assert_eq!(res, 0.0);
                }
            }
        }
    }

    #[test]
    fn boundary_zeros_iff_axis_edge(spec in discrete_system()) {
        let sys = MopSystem::<Rational>::from_family(spec).unwrap();
        let lat = lattice_for_system(&sys, 7).unwrap();
        // Shared finite support: at |n| = N the polynomial vanishes on every mass point.
        let shared = lat.bounds().iter().filter(|b| b.finite_support).map(|b| b.cap).min().unwrap_or(usize::MAX);
        for n in lat.indices() {
            if !lat.is_normal(&n) || n.iter().sum::<usize>() >= shared {
                continue;
            }
            for j in 0..2 {
                let Some(a) = lat.a(&n, j) else { continue };
                let b = lat.bounds()[j];
                let edge = n[j] == 0 || (b.finite_support && n[j] == b.cap);
                prop_assert_eq!(a.is_zero(), edge, "a_{{{:?},{}}}", n, j);
            }
        }
    }

    #[test]
    fn parallel_fill_is_bit_identical(spec in discrete_system(), threads in 2usize..=6) {
        let sys = MopSystem::<Rational>::from_family(spec).unwrap();
        let pool = |k: usize| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
        let one = pool(1).install(|| lattice_for_system(&sys, 6).unwrap());
        let many = pool(threads).install(|| lattice_for_system(&sys, 6).unwrap());
        for n in one.indices() {
            prop_assert_eq!(one.cell(&n), many.cell(&n));
        }
        prop_assert_eq!(one.indices(), many.indices());
    }

    #[test]
    fn christoffel_product_and_slab_zeros(a in (1i64..=6, 1i64..=6), z in 1i64..=9) {
        let sys = MopSystem::<Rational>::from_family(FamilySpec::Charlier { a: vec![q(a.0, 1), q(2 * a.1 + 1, 2)] }).unwrap();
        let t = TransformSpec::from_roots(vec![q(-z, 2)], 4).unwrap();
        let out = transform_nnrr(&sys, &t).unwrap();
        prop_assert!(out.breakdowns.is_empty());
        let hat = Type2Table::build(&out.lattice, None);
        let aug = Type2Table::build(&out.augmented, None);
        for (k, p) in hat.iter() {
            let mut km = k.clone();
            km.push(1);
            prop_assert_eq!(aug.get(&km), Some(&t.phi().mul(p)));
            prop_assert!(out.augmented.a(&km, 2).is_some_and(|v| v.is_zero()));
        }
    }

    #[test]
    fn angelesco_zeros_are_real_and_in_the_supports(a in 1i64..=9, n0 in 1usize..=4, n1 in 1usize..=4) {
        // Angelesco–Jacobi with support [a, 0] ∪ [0, 1], a = -a'/3.
        let sys = MopSystem::<f64>::from_family(FamilySpec::AngelescoJacobi {
            alpha: q(0, 1), beta: q(0, 1), gamma: q(0, 1), a: q(-a, 3),
        }).unwrap();
        let lat = lattice_for_system(&sys, n0 + n1).unwrap();
        let p = Type2Table::build(&lat, None).require(&[n0, n1]).unwrap().clone();
        let rs = roots(&p).unwrap();
        prop_assert!(rs.real);
        let lo = -(a as f64) / 3.0;
        for x in rs.reals() {
            prop_assert!(x >= lo - 1e-8 && x <= 1.0 + 1e-8, "root {} outside [{}, 1]", x, lo);
        }
    }

    #[test]
    fn interlacing_invariant_under_affine_maps(
        spec in discrete_system(),
        s in prop_oneof![(1i64..=5).prop_map(|v| v as f64), (1i64..=5).prop_map(|v| -(v as f64))],
        t in -5i64..=5,
    ) {
        let sys = MopSystem::<Rational>::from_family(spec).unwrap();
        let table = Type2Table::build(&lattice_for_system(&sys, 5).unwrap(), None);
        let (Some(p), Some(r)) = (table.get(&[2, 1]), table.get(&[3, 1])) else { return Ok(()) };
        let (u, v) = (roots(p).unwrap(), roots(r).unwrap());
        let before = interlace(&u, &v);
        let after = interlace(&u.affine(s, t as f64), &v.affine(s, t as f64));
        prop_assert_eq!(before.ok(), after.ok());
    }
}
