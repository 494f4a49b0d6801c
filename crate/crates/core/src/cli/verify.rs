//! The verification suites behind `mopchr verify`.

use serde_json::{json, Value};

use crate::christoffel::{transform_nnrr, transform_type2_det, transform_type2_iterated, TransformSpec};
use crate::error::{MopError, Result};
use crate::functionals::{FamilySpec, MopSystem};
use crate::lattice::{cc_residuals, lattice_for_system, type2_oracle, NnrrLattice, Type2Table};
use crate::numerics::tol::INTERLACE_MARGIN;
use crate::numerics::{level_set, parse_rational, Poly, Rational, Scalar};
use crate::zeros::{default_families, interlacing_suite, mesh_suite, SuiteReport};

use super::output::float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Residuals,
    Oracle,
    Transforms,
    Interlacing,
    Mesh,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Residuals => "residuals",
            Suite::Oracle => "oracle",
            Suite::Transforms => "transforms",
            Suite::Interlacing => "interlacing",
            Suite::Mesh => "mesh",
            Suite::All => "all",
        }
    }
}

/// One pass/fail line of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    /// The measured quantity (residual, deviation, margin or failure count).
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "name": self.name,
            "pass": self.pass,
            "value": float(self.value),
            "tolerance": float(self.tolerance),
            "detail": self.detail,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub interlacing: Vec<SuiteReport>,
    pub mesh: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self, suite: Suite) -> Value {
        json!({
            "command": "verify",
            "suite": suite.name(),
            "pass": self.pass(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "failures": self.failures().iter().map(|c| format!("{}/{}", c.suite, c.name)).collect::<Vec<_>>(),
        })
    }

    /// All rows of the interlacing (or mesh) suites as one report.
    pub fn merged(reports: &[SuiteReport]) -> SuiteReport {
        let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.iter().cloned()).collect();
        SuiteReport {
            family: "all".into(),
            dmax: reports.iter().map(|r| r.dmax).max().unwrap_or(0),
            failures: rows.iter().filter(|r| !r.pass).count(),
            min_margin: reports.iter().map(|r| r.min_margin).fold(f64::INFINITY, f64::min),
            rows,
        }
    }
}

/// Optional overrides of the default configuration.
#[derive(Debug, Clone, Default)]
pub struct VerifyConfig {
    pub system: Option<FamilySpec>,
    pub dmax: Option<usize>,
}

fn r(s: &str) -> Rational {
    parse_rational(s).expect("literal rational")
}

/// The four exactly known discrete systems used throughout the default suites.
pub fn discrete_systems() -> Vec<FamilySpec> {
    vec![
        FamilySpec::Charlier { a: vec![r("1"), r("2")] },
        FamilySpec::Meixner1 { cs: vec![r("1/3"), r("1/2")], beta: r("2") },
        FamilySpec::Krawtchouk { n: 10, ps: vec![r("1/4"), r("2/3")] },
        FamilySpec::Hahn { alphas: vec![r("0"), r("1/2")], beta: r("1"), n: 8 },
    ]
}

pub fn jacobi_pineiro() -> FamilySpec {
    FamilySpec::JacobiPineiro { alphas: vec![r("0"), r("1/2")], beta: r("0") }
}

pub fn angelesco_jacobi() -> FamilySpec {
    FamilySpec::AngelescoJacobi { alpha: r("0"), beta: r("0"), gamma: r("0"), a: r("-1") }
}

/// `x - 5`, `(x - 5)(x - 7)` and `(x - 5)^2`.
pub fn default_phis(dmax: usize) -> Vec<TransformSpec<Rational>> {
    vec![
        TransformSpec::from_roots(vec![r("5")], dmax).expect("valid Φ"),
        TransformSpec::from_roots(vec![r("5"), r("7")], dmax).expect("valid Φ"),
        TransformSpec::new(vec![(r("5"), 2)], None, dmax).expect("valid Φ"),
    ]
}

fn exact_family(spec: &FamilySpec) -> bool {
    (0..spec.rank()).all(|j| spec.is_exact(j))
}

fn render_phi<T: Scalar>(t: &TransformSpec<T>) -> String {
    let parts: Vec<String> = t
        .roots()
        .iter()
        .map(|(z, m)| {
            let z = z.to_rational().map_or_else(|| format!("{:?}", z.to_complex()), |q| crate::numerics::format_rational(&q));
            if *m == 1 { format!("(x-{z})") } else { format!("(x-{z})^{m}") }
        })
        .collect();
    parts.concat()
}

/// Exact equality, or relative coefficient distance within `tol`.
pub fn agree<T: Scalar>(p: &Poly<T>, q: &Poly<T>, tol: f64) -> bool {
    if T::EXACT {
        p == q
    } else {
        p.coeffs().len() == q.coeffs().len() && p.distance(q) <= tol * q.max_abs().max(1.0)
    }
}

/// Rational for exactly known families unless `float` is set.
fn use_exact(spec: &FamilySpec, float: bool) -> bool {
    !float && exact_family(spec)
}

/// CC residuals up to `|n| ≤ dmax`: exactly zero on the rational backend,
/// below `tol` on floats.
pub fn residual_check(spec: &FamilySpec, dmax: usize, tol: f64, float: bool) -> Result<Check> {
    fn run<T: Scalar>(spec: &FamilySpec, dmax: usize, tol: f64) -> Result<Check> {
        let lat = lattice_for_system(&MopSystem::<T>::from_family(spec.clone())?, dmax)?;
        let rep = cc_residuals(&lat);
        let pass = if T::EXACT { rep.exact_zero } else { rep.worst() < tol } && lat.breakdowns().is_empty();
        Ok(Check {
            suite: "residuals",
            name: format!("{} |n|<={dmax}", spec.shorthand()),
            pass,
            value: rep.worst(),
            tolerance: if T::EXACT { 0.0 } else { tol },
            detail: format!(
                "{} backend, checked {:?}, breakdowns {}",
                T::BACKEND.name(),
                rep.checked,
                lat.breakdowns().len()
            ),
        })
    }
    if use_exact(spec, float) { run::<Rational>(spec, dmax, tol) } else { run::<f64>(spec, dmax, tol) }
}

/// Type II polynomials from the recurrence against moment-matrix solves.
pub fn oracle_check(spec: &FamilySpec, dmax: usize, tol: f64, float: bool) -> Result<Check> {
    fn run<T: Scalar>(spec: &FamilySpec, dmax: usize, tol: f64) -> Result<Check> {
        let sys = MopSystem::<T>::from_family(spec.clone())?;
        let lat = lattice_for_system(&sys, dmax)?;
        let table = Type2Table::build(&lat, None);
        let (mut checked, mut bad, mut worst) = (0usize, Vec::new(), 0.0f64);
        for n in lat.indices() {
            let Ok(oracle) = type2_oracle(&sys, &n) else {
                if table.get(&n).is_some() {
                    bad.push(n);
                }
                continue;
            };
            checked += 1;
            match table.get(&n) {
                Some(p) => {
                    worst = worst.max(p.distance(&oracle) / oracle.max_abs().max(1.0));
                    if !agree(p, &oracle, tol) {
                        bad.push(n);
                    }
                }
                None => bad.push(n),
            }
        }
        Ok(Check {
            suite: "oracle",
            name: format!("{} |n|<={dmax}", spec.shorthand()),
            pass: bad.is_empty(),
            value: worst,
            tolerance: if T::EXACT { 0.0 } else { tol },
            detail: format!("{} backend, checked {checked}, disagreements {:?}", T::BACKEND.name(), bad),
        })
    }
    if use_exact(spec, float) { run::<Rational>(spec, dmax, tol) } else { run::<f64>(spec, dmax, tol) }
}

/// Counts from [`transform_agreement`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransformAgreement {
    /// Indices `k` where `Φν` is normal.
    pub checked: usize,
    /// Normal `k` with no `P̂_k` from the augmented lattice.
    pub nnrr_gaps: Vec<Vec<usize>>,
    /// Normal `k` the iterated one-step route does not reach.
    pub iterated_gaps: Vec<Vec<usize>>,
    /// Normal `k` where the determinantal formula fails.
    pub det_failures: Vec<Vec<usize>>,
    /// Values that disagree with the moment-matrix solve, tagged by route.
    pub mismatches: Vec<(String, Vec<usize>)>,
    /// Largest relative deviation from the oracle over all routes.
    pub max_dev: f64,
}

impl TransformAgreement {
    pub fn pass(&self) -> bool {
        self.nnrr_gaps.is_empty()
            && self.iterated_gaps.is_empty()
            && self.det_failures.is_empty()
            && self.mismatches.is_empty()
    }
}

/// Runs the augmented-lattice, determinantal and iterated one-step routes for
/// `Φν` at every `|k| ≤ t.dmax` and compares each with the moment-matrix
/// solve for `Φν`; also checks `Φ P̂_k = P_{(k,m)}` on the augmented lattice.
pub fn transform_agreement<T: Scalar>(sys: &MopSystem<T>, t: &TransformSpec<T>, tol: f64) -> Result<TransformAgreement> {
    let m = t.degree();
    let kmax = t.dmax;
    let table = Type2Table::build(&lattice_for_system(sys, kmax + m)?, None);
    let out = transform_nnrr(sys, t)?;
    let hat = Type2Table::build(&out.lattice, None);
    let aug = Type2Table::build(&out.augmented, None);
    let iter = transform_type2_iterated(&table, t);
    let hat_sys = sys.modified(&t.phi())?;
    let phi = t.phi();
    let caps: Vec<usize> = sys.nvec().iter().map(|c| c.map_or(kmax, |n| n.min(kmax))).collect();
    let mut rep = TransformAgreement::default();
    let note = |rep: &mut TransformAgreement, route: &str, p: &Poly<T>, q: &Poly<T>, k: &[usize]| {
        rep.max_dev = rep.max_dev.max(p.distance(q) / q.max_abs().max(1.0));
        if !agree(p, q, tol) {
            rep.mismatches.push((route.to_string(), k.to_vec()));
        }
    };
    for d in 0..=kmax {
        for k in level_set(sys.rank(), d, &caps) {
            let Ok(oracle) = type2_oracle(&hat_sys, &k) else {
                if hat.get(&k).is_some() {
                    rep.mismatches.push(("nnrr-nonnormal".into(), k.clone()));
                }
                continue;
            };
            rep.checked += 1;
            let mut km = k.clone();
            km.push(m);
            match hat.get(&k) {
                Some(p) => {
                    note(&mut rep, "nnrr", p, &oracle, &k);
                    match aug.get(&km) {
                        Some(big) => note(&mut rep, "phi-times", big, &phi.mul(&oracle), &k),
                        None => rep.mismatches.push(("phi-times".into(), k.clone())),
                    }
                }
                None => rep.nnrr_gaps.push(k.clone()),
            }
            match transform_type2_det(&table, &k, t, None) {
                Ok(p) => note(&mut rep, "det", &p, &oracle, &k),
                Err(_) => rep.det_failures.push(k.clone()),
            }
            match iter.get(&k) {
                Some(p) => note(&mut rep, "onestep", p, &oracle, &k),
                None => rep.iterated_gaps.push(k.clone()),
            }
        }
    }
    Ok(rep)
}

fn transform_check<T: Scalar>(spec: &FamilySpec, t: &TransformSpec<T>, tol: f64) -> Result<Check> {
    let sys = MopSystem::<T>::from_family(spec.clone())?;
    let rep = transform_agreement(&sys, t, tol)?;
    Ok(Check {
        suite: "transforms",
        name: format!("{} Φ={} |k|<={}", spec.shorthand(), render_phi(t), t.dmax),
        pass: rep.pass(),
        value: rep.max_dev,
        tolerance: if T::EXACT { 0.0 } else { tol },
        detail: format!(
            "checked {}, nnrr gaps {:?}, iterated gaps {:?}, det failures {:?}, mismatches {:?}",
            rep.checked, rep.nnrr_gaps, rep.iterated_gaps, rep.det_failures, rep.mismatches
        ),
    })
}

/// Boundary zeros: `a_{(k,m),r} = 0` on the augmented lattice and
/// `a_{n,j} = 0` at `n_j ∈ {0, N_j}` on finite axes. Returns the offending
/// `(n, j)`.
pub fn boundary_zero_violations<T: Scalar>(lat: &NnrrLattice<T>, slab: Option<usize>) -> Vec<(Vec<usize>, usize)> {
    let r = lat.rank();
    let mut bad = Vec::new();
    for n in lat.indices() {
        for j in 0..r {
            let Some(a) = lat.a(&n, j) else { continue };
            let b = lat.bounds()[j];
            let finite_edge = b.finite_support && n[j] == b.cap;
            let slab_edge = slab.is_some_and(|m| j == r - 1 && n[j] == m);
            if (n[j] == 0 || finite_edge || slab_edge) && !a.is_zero() {
                bad.push((n.clone(), j));
            }
        }
    }
    bad
}

fn boundary_check(spec: &FamilySpec, t: &TransformSpec<Rational>) -> Result<Check> {
    let sys = MopSystem::<Rational>::from_family(spec.clone())?;
    let out = transform_nnrr(&sys, t)?;
    let m = t.degree();
    let mut bad = boundary_zero_violations(&out.augmented, Some(m));
    let r = sys.rank();
    let unreached: Vec<_> = out
        .augmented
        .indices()
        .into_iter()
        .filter(|n| n[r] == m && out.augmented.is_normal(n) && out.augmented.a(n, r).is_none())
        .collect();
    bad.extend(unreached.into_iter().map(|n| (n, r)));
    Ok(Check {
        suite: "transforms",
        name: format!("{} Φ={} boundary zeros", spec.shorthand(), render_phi(t)),
        pass: bad.is_empty(),
        value: bad.len() as f64,
        tolerance: 0.0,
        detail: format!("violations {bad:?}"),
    })
}

/// `margin`: also require the smallest passing margin to exceed it.
fn suite_check(suite: &'static str, rep: &SuiteReport, margin: Option<f64>) -> Check {
    let pass = rep.pass() && margin.is_none_or(|tol| rep.rows.is_empty() || rep.min_margin > tol);
    Check {
        suite,
        name: format!("{} |n|<={}", rep.family, rep.dmax),
        pass,
        value: rep.min_margin,
        tolerance: margin.unwrap_or(0.0),
        detail: format!(
            "rows {}, failures {}{}",
            rep.rows.len(),
            rep.failures,
            rep.rows.iter().find(|r| !r.pass).map_or(String::new(), |r| format!(", first {} at {:?}", r.relation, r.index))
        ),
    }
}

fn mesh_families() -> Vec<FamilySpec> {
    default_families()
        .into_iter()
        .filter(|f| {
            matches!(
                f,
                FamilySpec::Charlier { .. }
                    | FamilySpec::Meixner1 { .. }
                    | FamilySpec::Meixner2 { .. }
                    | FamilySpec::Krawtchouk { .. }
                    | FamilySpec::Hahn { .. }
            )
        })
        .collect()
}

/// Runs one suite (or all) on the default configuration, or on
/// `cfg.system` alone when given.
pub fn verify(suite: Suite, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    let want = |s: Suite| suite == s || suite == Suite::All;
    let pick = |defaults: Vec<FamilySpec>| cfg.system.clone().map_or(defaults, |s| vec![s]);
    if want(Suite::Residuals) {
        let d = cfg.dmax.unwrap_or(12);
        let mut cases: Vec<(FamilySpec, bool)> = discrete_systems().into_iter().map(|s| (s, false)).collect();
        cases.push((jacobi_pineiro(), true));
        if let Some(s) = &cfg.system {
            cases = vec![(s.clone(), false)];
        }
        for (s, float) in cases {
            rep.checks.push(residual_check(&s, d, 1e-10, float)?);
        }
    }
    if want(Suite::Oracle) {
        let mut cases: Vec<(FamilySpec, usize, bool)> = discrete_systems().into_iter().map(|s| (s, 8, false)).collect();
        cases.push((angelesco_jacobi(), 6, true));
        if let Some(s) = &cfg.system {
            cases = vec![(s.clone(), 8, false)];
        }
        for (s, d, float) in cases {
            rep.checks.push(oracle_check(&s, cfg.dmax.unwrap_or(d), 1e-8, float)?);
        }
    }
    if want(Suite::Transforms) {
        let d = cfg.dmax.unwrap_or(6);
        for s in pick(discrete_systems()) {
            if exact_family(&s) {
                for t in default_phis(d) {
                    rep.checks.push(transform_check(&s, &t, 1e-9)?);
                    rep.checks.push(boundary_check(&s, &t)?);
                }
            } else {
                for t in default_phis(d) {
                    let tf = TransformSpec::new(
                        t.roots().iter().map(|(z, m)| (f64::from_rational(z), *m)).collect(),
                        None,
                        d,
                    )?;
                    rep.checks.push(transform_check(&s, &tf, 1e-9)?);
                }
            }
        }
    }
    if want(Suite::Interlacing) {
        let d = cfg.dmax.unwrap_or(6);
        for s in pick(default_families()) {
            let r = interlacing_suite(&s, d)?;
            rep.checks.push(suite_check("interlacing", &r, Some(INTERLACE_MARGIN)));
            rep.interlacing.push(r);
        }
    }
    if want(Suite::Mesh) {
        let d = cfg.dmax.unwrap_or(8);
        let families = match &cfg.system {
            Some(s) => vec![s.clone()],
            None => mesh_families(),
        };
        for s in families {
            let r = mesh_suite(&s, d)?;
            rep.checks.push(suite_check("mesh", &r, None));
            rep.mesh.push(r);
        }
    }
    if rep.checks.is_empty() {
        return Err(MopError::Usage("no checks selected".into()));
    }
    Ok(rep)
}
