use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{MopError, Result};
use crate::functionals::{FamilySpec, MopSystem};
use crate::lattice::{lattice_for_system, type1_solve, Type2Table};
use crate::numerics::tol::INTERLACE_MARGIN;
use crate::numerics::{index_len, level_set, plus, MultiIndex, Poly, Rational, Scalar};

use super::{interlace_with, mesh, roots, RootSet};

/// Column layout of the suite CSV; bump [`CSV_VERSION`] when it changes.
pub const CSV_COLUMNS: [&str; 8] = ["version", "family", "relation", "index", "axis", "verdict", "margin", "mesh"];
pub const CSV_VERSION: u32 = 1;

/// How the shifted family's polynomial enters a relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Xform {
    Plain,
    /// `p(x - 1)`
    ShiftLeft,
    /// `x p(x)`
    TimesX,
    /// `x p(x - 1)`
    TimesXShiftLeft,
}

impl Xform {
    fn apply<T: Scalar>(self, p: &Poly<T>) -> Poly<T> {
        let left = |p: &Poly<T>| p.shift(&T::from_i64(-1));
        match self {
            Xform::Plain => p.clone(),
            Xform::ShiftLeft => left(p),
            Xform::TimesX => p.mul_x(),
            Xform::TimesXShiftLeft => left(p).mul_x(),
        }
    }

    fn render(self, f: &str) -> String {
        match self {
            Xform::Plain => format!("{f}(x)"),
            Xform::ShiftLeft => format!("{f}(x-1)"),
            Xform::TimesX => format!("x {f}(x)"),
            Xform::TimesXShiftLeft => format!("x {f}(x-1)"),
        }
    }
}

/// One itemized interlacing statement: the shifted family against the base
/// family at `n` and at `n + e_j`.
#[derive(Debug, Clone)]
struct Relation {
    label: String,
    shifted: FamilySpec,
    same: Xform,
    next: Xform,
    type1: bool,
    /// Only `|n| < limit` is covered.
    limit: Option<usize>,
}

fn relations(spec: &FamilySpec) -> Result<Vec<Relation>> {
    use Xform::*;
    let rel = |key: &str, d: i64, same, next, type1| -> Result<Relation> {
        let sign = if d > 0 { "+" } else { "" };
        Ok(Relation {
            label: format!("{}{key}{sign}{d}", if type1 { "I:" } else { "II:" }),
            shifted: spec.shifted(key, d)?,
            same,
            next,
            type1,
            limit: None,
        })
    };
    let same_family = |label: &str, same, next| Relation {
        label: label.to_string(),
        shifted: spec.clone(),
        same,
        next,
        type1: false,
        limit: None,
    };
    let finite = |mut r: Relation, n: u32| {
        r.limit = Some(n as usize);
        r
    };
    Ok(match spec {
        FamilySpec::Laguerre1 { .. } | FamilySpec::Laguerre2 { .. } => vec![rel("alpha", 1, Plain, Plain, false)?],
        FamilySpec::JacobiPineiro { .. } => {
            vec![rel("alpha", 1, Plain, Plain, false)?, rel("beta", 1, Plain, Plain, false)?]
        }
        FamilySpec::AngelescoJacobi { .. } => vec![
            rel("alpha", 1, Plain, Plain, false)?,
            rel("beta", 1, Plain, Plain, false)?,
            rel("gamma", 1, TimesX, TimesX, false)?,
            rel("alpha", 1, Plain, Plain, true)?,
            rel("beta", 1, Plain, Plain, true)?,
            rel("gamma", 1, Plain, Plain, true)?,
        ],
        FamilySpec::JacobiLaguerre { .. } => vec![
            rel("beta", 1, Plain, Plain, false)?,
            rel("gamma", 1, TimesX, TimesX, false)?,
            rel("beta", 1, Plain, Plain, true)?,
            rel("gamma", 1, Plain, Plain, true)?,
        ],
        FamilySpec::JacobiHermite { .. } => {
            vec![rel("gamma", 1, TimesX, TimesX, false)?, rel("gamma", 1, Plain, Plain, true)?]
        }
        FamilySpec::Charlier { .. } => vec![same_family("II:self", ShiftLeft, TimesXShiftLeft)],
        FamilySpec::Meixner1 { .. } | FamilySpec::Meixner2 { .. } => {
            vec![rel("beta", 1, ShiftLeft, ShiftLeft, false)?]
        }
        FamilySpec::Krawtchouk { n, .. } | FamilySpec::Hahn { n, .. } => vec![
            finite(rel("n", -1, ShiftLeft, ShiftLeft, false)?, *n),
            finite(rel("n", -1, Plain, Plain, false)?, *n),
        ],
    })
}

/// One checked instance of a relation.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SuiteRow {
    pub family: String,
    /// e.g. `II:alpha+1 x P'(x) ~ P_{n+e_j}(x)`.
    pub relation: String,
    pub index: MultiIndex,
    /// Axis `j` of `n + e_j`, or of the type I component.
    pub axis: Option<usize>,
    pub verdict: String,
    pub margin: f64,
    /// Mesh of the base polynomial when it has two or more zeros.
    pub mesh: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SuiteReport {
    pub family: String,
    pub dmax: usize,
    pub rows: Vec<SuiteRow>,
    pub failures: usize,
    /// Smallest margin over every row that passed.
    pub min_margin: f64,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }

    /// CSV with the columns of [`CSV_COLUMNS`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| MopError::Usage(format!("csv: {e}"));
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.rows {
            let idx = r.index.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            w.write_record([
                CSV_VERSION.to_string(),
                r.family.clone(),
                r.relation.clone(),
                idx,
                r.axis.map(|j| j.to_string()).unwrap_or_default(),
                r.verdict.clone(),
                format!("{:e}", r.margin),
                r.mesh.map(|m| format!("{m:.12}")).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| MopError::Usage(format!("csv: {e}")))
    }
}

/// Zeros of a polynomial of any degree; constants have none.
fn zero_set<T: Scalar>(p: &Poly<T>) -> Result<RootSet> {
    match p.degree() {
        Some(d) if d >= 1 => roots(p),
        _ => Ok(RootSet {
            values: Vec::<Complex64>::new(),
            multiplicity: Vec::new(),
            residuals: Vec::new(),
            real: true,
            cluster_tolerance: crate::numerics::tol::ROOT_CLUSTER,
        }),
    }
}

fn type2_table<T: Scalar>(spec: &FamilySpec, dmax: usize) -> Result<Type2Table<T>> {
    let sys = MopSystem::<T>::from_family(spec.clone())?;
    Ok(Type2Table::build(&lattice_for_system(&sys, dmax)?, None))
}

fn type1_table<T: Scalar>(spec: &FamilySpec, indices: &[MultiIndex]) -> Result<BTreeMap<MultiIndex, Vec<Poly<T>>>> {
    let sys = MopSystem::<T>::from_family(spec.clone())?;
    indices
        .par_iter()
        .filter(|n| index_len(n) > 0)
        .map(|n| Ok((n.clone(), type1_solve(&sys, n)?.polys)))
        .collect()
}

fn indices(spec: &FamilySpec, dmax: usize) -> Vec<MultiIndex> {
    let r = spec.rank();
    let caps = vec![spec.support_size().unwrap_or(dmax); r];
    (0..=dmax).flat_map(|d| level_set(r, d, &caps)).collect()
}

fn check(u: &Poly<impl Scalar>, v: &Poly<impl Scalar>) -> (String, f64, bool) {
    let verdict = zero_set(u).and_then(|a| zero_set(v).and_then(|b| interlace_with(&a, &b, INTERLACE_MARGIN)));
    match verdict {
        Ok(r) => (r.verdict.name().to_string(), r.margin, r.verdict.holds()),
        Err(MopError::ToleranceAmbiguous(_)) => ("ambiguous".into(), 0.0, false),
        Err(e) => (format!("error: {e}"), 0.0, false),
    }
}

fn base_mesh<T: Scalar>(p: &Poly<T>) -> Option<f64> {
    zero_set(p).ok().filter(|z| z.len() >= 2).and_then(|z| mesh(&z).ok())
}

fn run<T: Scalar>(spec: &FamilySpec, dmax: usize) -> Result<Vec<SuiteRow>> {
    let family = spec.shorthand();
    let base2 = type2_table::<T>(spec, dmax + 1)?;
    let all = indices(spec, dmax + 1);
    let mut base1: Option<BTreeMap<MultiIndex, Vec<Poly<T>>>> = None;
    let mut rows = Vec::new();
    for rel in relations(spec)? {
        let limit = rel.limit.unwrap_or(usize::MAX);
        let ns: Vec<MultiIndex> = indices(spec, dmax).into_iter().filter(|n| index_len(n) < limit).collect();
        let r = spec.rank();
        if rel.type1 {
            if base1.is_none() {
                base1 = Some(type1_table::<T>(spec, &all)?);
            }
            let base = base1.as_ref().expect("filled above");
            let shifted = type1_table::<T>(&rel.shifted, &ns)?;
            let found: Vec<Vec<SuiteRow>> = ns
                .par_iter()
                .map(|n| {
                    let mut out = Vec::new();
                    for j in (0..r).filter(|&j| n[j] > 0) {
                        let (Some(s), Some(b0), Some(b1)) = (shifted.get(n), base.get(n), base.get(&plus(n, j))) else {
                            continue;
                        };
                        let lhs = rel.same.apply(&s[j]);
                        for (tag, rhs) in [("A_{n,j}", &b0[j]), ("A_{n+e_j,j}", &b1[j])] {
                            let (verdict, margin, pass) = check(&lhs, rhs);
                            out.push(SuiteRow {
                                family: family.clone(),
                                relation: format!("{} {} ~ {tag}(x)", rel.label, rel.same.render("A'_{n,j}")),
                                index: n.clone(),
                                axis: Some(j),
                                verdict,
                                margin,
                                mesh: None,
                                pass,
                            });
                        }
                    }
                    out
                })
                .collect();
            rows.extend(found.into_iter().flatten());
        } else {
            let shifted = type2_table::<T>(&rel.shifted, dmax)?;
            let found: Vec<Vec<SuiteRow>> = ns
                .par_iter()
                .map(|n| {
                    let mut out = Vec::new();
                    let (Some(s), Some(b0)) = (shifted.get(n), base2.get(n)) else { return out };
                    let lhs = rel.same.apply(s);
                    let (verdict, margin, pass) = check(&lhs, b0);
                    out.push(SuiteRow {
                        family: family.clone(),
                        relation: format!("{} {} ~ P_n(x)", rel.label, rel.same.render("P'_n")),
                        index: n.clone(),
                        axis: None,
                        verdict,
                        margin,
                        mesh: base_mesh(b0),
                        pass,
                    });
                    let lhs = rel.next.apply(s);
                    for j in 0..r {
                        let Some(b1) = base2.get(&plus(n, j)) else { continue };
                        let (verdict, margin, pass) = check(&lhs, b1);
                        out.push(SuiteRow {
                            family: family.clone(),
                            relation: format!("{} {} ~ P_{{n+e_j}}(x)", rel.label, rel.next.render("P'_n")),
                            index: n.clone(),
                            axis: Some(j),
                            verdict,
                            margin,
                            mesh: base_mesh(b1),
                            pass,
                        });
                    }
                    out
                })
                .collect();
            rows.extend(found.into_iter().flatten());
        }
    }
    Ok(rows)
}

fn report(spec: &FamilySpec, dmax: usize, rows: Vec<SuiteRow>) -> SuiteReport {
    let failures = rows.iter().filter(|r| !r.pass).count();
    let min_margin = rows.iter().filter(|r| r.pass).map(|r| r.margin).fold(f64::INFINITY, f64::min);
    SuiteReport { family: spec.shorthand(), dmax, rows, failures, min_margin }
}

fn exact_family(spec: &FamilySpec) -> bool {
    (0..spec.rank()).all(|j| spec.is_exact(j))
}

/// Checks every itemized interlacing relation of the family for `|n| ≤ dmax`
/// (`P_{n+e_j}` and `A_{n+e_j}` reach `dmax + 1`). The shifted family
/// plays the role of the one-step Christoffel transform. Exactly known
/// families are generated on the rational backend.
pub fn interlacing_suite(spec: &FamilySpec, dmax: usize) -> Result<SuiteReport> {
    spec.validate()?;
    let rows = if exact_family(spec) { run::<Rational>(spec, dmax)? } else { run::<f64>(spec, dmax)? };
    Ok(report(spec, dmax, rows))
}

/// Lower bound on the mesh of every type II polynomial with `2 ≤ |n| ≤ dmax`:
/// `> 1 - 1e-9` (`strict`) or `≥ 1 - 1e-9`.
pub fn mesh_suite(spec: &FamilySpec, dmax: usize) -> Result<SuiteReport> {
    spec.validate()?;
    let strict = match spec {
        FamilySpec::Charlier { .. } | FamilySpec::Krawtchouk { .. } | FamilySpec::Hahn { .. } => true,
        FamilySpec::Meixner1 { .. } | FamilySpec::Meixner2 { .. } => false,
        _ => return Err(MopError::Usage(format!("{} has no mesh bound", spec.name()))),
    };
    let table = type2_table::<Rational>(spec, dmax)?;
    let bound = 1.0 - INTERLACE_MARGIN;
    let ns: Vec<MultiIndex> = indices(spec, dmax).into_iter().filter(|n| index_len(n) >= 2).collect();
    let rows = ns
        .par_iter()
        .filter_map(|n| {
            let p = table.get(n)?;
            let m = base_mesh(p);
            let pass = m.is_some_and(|m| if strict { m > bound } else { m >= bound });
            Some(SuiteRow {
                family: spec.shorthand(),
                relation: if strict { "mesh > 1" } else { "mesh >= 1" }.into(),
                index: n.clone(),
                axis: None,
                verdict: if pass { "ok" } else { "violated" }.into(),
                margin: m.map_or(0.0, |m| m - 1.0),
                mesh: m,
                pass,
            })
        })
        .collect();
    Ok(report(spec, dmax, rows))
}

/// One sampled parameter set per family, used by `verify`.
pub fn default_families() -> Vec<FamilySpec> {
    let r = |s: &str| crate::numerics::parse_rational(s).expect("literal rational");
    vec![
        FamilySpec::Laguerre1 { alphas: vec![r("0"), r("1/2")] },
        FamilySpec::Laguerre2 { cs: vec![r("1"), r("2")], alpha: r("0") },
        FamilySpec::JacobiPineiro { alphas: vec![r("0"), r("1/2")], beta: r("0") },
        FamilySpec::AngelescoJacobi { alpha: r("0"), beta: r("0"), gamma: r("0"), a: r("-1") },
        FamilySpec::JacobiLaguerre { beta: r("0"), gamma: r("0"), a: r("-1") },
        FamilySpec::JacobiHermite { gamma: r("0") },
        FamilySpec::Charlier { a: vec![r("1"), r("2")] },
        FamilySpec::Meixner1 { cs: vec![r("1/3"), r("1/2")], beta: r("2") },
        FamilySpec::Meixner2 { c: r("1/2"), betas: vec![r("1"), r("3/2")] },
        FamilySpec::Krawtchouk { n: 10, ps: vec![r("1/4"), r("2/3")] },
        FamilySpec::Hahn { alphas: vec![r("0"), r("1/2")], beta: r("1"), n: 8 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::parse_rational;

    #[test]
    fn charlier_self_interlacing() {
        let spec = FamilySpec::Charlier { a: vec![parse_rational("1").unwrap(), parse_rational("2").unwrap()] };
        let rep = interlacing_suite(&spec, 4).unwrap();
        assert!(rep.pass(), "{:?}", rep.rows.iter().find(|r| !r.pass));
        assert!(rep.rows.len() > 20);
        let m = mesh_suite(&spec, 6).unwrap();
        assert!(m.pass());
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("version,family,relation,index,axis,verdict,margin,mesh\n"));
    }

    #[test]
    fn krawtchouk_relations() {
        let q = |s: &str| parse_rational(s).unwrap();
        let spec = FamilySpec::Krawtchouk { n: 8, ps: vec![q("3/10"), q("3/5")] };
        let rep = interlacing_suite(&spec, 5).unwrap();
        assert!(rep.pass(), "{:?}", rep.rows.iter().find(|r| !r.pass));
    }
}
