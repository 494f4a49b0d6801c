//! Command-line surface of the `mopchr` binary.
//!
//! Every subcommand prints one JSON document to stdout. With `--out DIR`
//! the same document and any CSV tables are also written to `DIR`. Exit
//! codes: 0 when every check passes, 1 on a numerical or verification
//! failure, 2 on bad input.

pub mod input;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::christoffel::{transform_nnrr, transform_type2_det, transform_type2_iterated, TransformSpec};
use crate::error::{MopError, Result};
use crate::functionals::{FamilySpec, MopSystem, Support};
use crate::lattice::{cc_residuals, lattice_for_system, type1_solve, type2_coeffs, Type2Table};
use crate::numerics::tol::{eps_from_env, eps_rel, set_eps_rel};
use crate::numerics::{index_len, level_set, Backend, MultiIndex, Poly, Rational, Scalar};
use crate::recurrence::marginal_jacobi;
use crate::zeros::{interlacing_suite, mesh_suite, roots, SuiteReport, CSV_VERSION};

use input::{PhiInput, SystemSource};
use output::{float, num, poly};
pub use verify::{verify, Check, Suite, VerifyConfig, VerifyReport};

#[derive(Debug, Parser)]
#[command(name = "mopchr", version, about = "Nearest-neighbour recurrences, Christoffel transforms and zero interlacing")]
pub struct Cli {
    /// Directory for JSON and CSV artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative tolerance for float comparisons (overrides MOPCHR_EPS).
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Nnrr,
    Det,
    Onestep,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolyType {
    #[value(name = "I", alias = "i", alias = "1")]
    I,
    #[value(name = "II", alias = "ii", alias = "2")]
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Coeffs,
    Zeros,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginal Jacobi coefficients of each component.
    Jacobi {
        /// Family shorthand such as `charlier:a=1,2`, or `@file.json`.
        #[arg(long, alias = "family")]
        system: String,
        /// Number of `b` coefficients.
        #[arg(short = 'L', long = "len")]
        len: usize,
        #[arg(long)]
        backend: Option<Backend>,
    },
    /// Nearest-neighbour recurrence coefficients up to `|n| = dmax`.
    Nnrr {
        #[arg(long, alias = "family")]
        system: String,
        #[arg(long)]
        dmax: usize,
        #[arg(long)]
        backend: Option<Backend>,
    },
    /// Christoffel transform `Φν` by one or all routes.
    Transform {
        #[arg(long, alias = "family")]
        system: String,
        /// `roots=5,7;mults=1,2`.
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        phi: Option<String>,
        /// JSON file `{"phi": {"roots": [...], "mults": [...]}, "weights": [...], "dmax": d}`.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Weights of the augmented functional, comma separated.
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        dmax: Option<usize>,
        #[arg(long, value_enum, default_value = "nnrr")]
        method: Method,
        #[arg(long)]
        backend: Option<Backend>,
    },
    /// Type I or type II polynomials at one multi-index.
    Polys {
        #[arg(long, alias = "family")]
        system: String,
        /// Multi-index, e.g. `2,1`.
        #[arg(long)]
        index: String,
        #[arg(long = "type", value_enum, default_value = "II")]
        kind: PolyType,
        #[arg(long, value_enum, default_value = "coeffs")]
        emit: Emit,
        #[arg(long)]
        backend: Option<Backend>,
    },
    /// Interlacing relations (and optionally the mesh bound) of one family.
    Interlace {
        #[arg(long, alias = "system")]
        family: String,
        #[arg(long, default_value_t = 6)]
        dmax: usize,
        /// Also check the minimal mesh up to this depth.
        #[arg(long)]
        mesh: Option<usize>,
    },
    /// Verification suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Run the suite on this family only.
        #[arg(long, alias = "family")]
        system: Option<String>,
        #[arg(long)]
        dmax: Option<usize>,
    },
}

/// Result of a command: the JSON document, whether all checks passed, and
/// extra files for `--out`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub json: Value,
    pub pass: bool,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn new(name: &'static str, json: Value, pass: bool) -> Self {
        Outcome { name, json, pass, artifacts: Vec::new() }
    }
}

macro_rules! dispatch {
    ($backend:expr, $f:ident($($arg:expr),*)) => {
        match $backend {
            Backend::Rational => $f::<Rational>($($arg),*),
            Backend::Float => $f::<f64>($($arg),*),
            Backend::Complex => $f::<Complex64>($($arg),*),
        }
    };
}

fn header(command: &str, src: &SystemSource, backend: Backend) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("system".into(), json!(src.label()));
    m.insert("backend".into(), json!(backend.name()));
    m
}

fn jacobi<T: Scalar>(src: &SystemSource, len: usize) -> Result<Outcome> {
    let sys: MopSystem<T> = src.build()?;
    let mut comps = Vec::new();
    for (j, f) in sys.functionals.iter().enumerate() {
        let l = f.support().cap().map_or(len, |n| n.min(len));
        let jd = marginal_jacobi(f, l)?;
        comps.push(json!({
            "axis": j,
            "support": match jd.support { Support::Finite(n) => json!(n), Support::Infinite => json!("infinite") },
            "c0": num(&jd.c0),
            "b": jd.b.iter().map(num).collect::<Vec<_>>(),
            "a": jd.a.iter().map(num).collect::<Vec<_>>(),
        }));
    }
    let mut m = header("jacobi", src, T::BACKEND);
    m.insert("components".into(), Value::Array(comps));
    Ok(Outcome::new("jacobi", Value::Object(m), true))
}

fn nnrr<T: Scalar>(src: &SystemSource, dmax: usize) -> Result<Outcome> {
    let lat = lattice_for_system(&src.build::<T>()?, dmax)?;
    let rep = cc_residuals(&lat);
    let pass = lat.breakdowns().is_empty();
    let mut m = header("nnrr", src, T::BACKEND);
    m.insert("lattice".into(), output::lattice(&lat));
    m.insert(
        "residuals".into(),
        json!({
            "max": rep.max.iter().map(|v| float(*v)).collect::<Vec<_>>(),
            "checked": rep.checked,
            "exact_zero": rep.exact_zero,
        }),
    );
    m.insert("pass".into(), json!(pass));
    Ok(Outcome::new("nnrr", Value::Object(m), pass))
}

fn poly_list<T: Scalar>(table: &Type2Table<T>, dmax: usize) -> Value {
    Value::Array(
        table
            .iter()
            .filter(|(k, _)| index_len(k) <= dmax)
            .map(|(k, p)| json!({ "index": k, "coeffs": poly(p) }))
            .collect(),
    )
}

fn max_dev<T: Scalar>(a: &Type2Table<T>, b: &Type2Table<T>) -> (f64, Vec<MultiIndex>) {
    let mut dev = 0.0f64;
    let mut missing = Vec::new();
    for (k, p) in a.iter() {
        match b.get(k) {
            Some(q) => dev = dev.max(p.distance(q) / q.max_abs().max(1.0)),
            None => missing.push(k.clone()),
        }
    }
    for (k, _) in b.iter() {
        if a.get(k).is_none() {
            missing.push(k.clone());
        }
    }
    missing.sort();
    (dev, missing)
}

/// `P̂_k` of `Φν` from the same system with `alpha + m`, when `Φ = x^m`.
fn closed_form<T: Scalar>(family: &FamilySpec, m: usize, dmax: usize) -> Option<Result<(String, Type2Table<T>)>> {
    let shifted = family.shifted("alpha", m as i64).ok()?;
    let run = || -> Result<(String, Type2Table<T>)> {
        let lat = lattice_for_system(&MopSystem::<T>::from_family(shifted.clone())?, dmax)?;
        Ok((shifted.shorthand(), Type2Table::build(&lat, None)))
    };
    Some(run())
}

fn transform<T: Scalar>(src: &SystemSource, phi: &PhiInput, dmax: usize, method: Method) -> Result<Outcome> {
    let sys: MopSystem<T> = src.build()?;
    let t: TransformSpec<T> = phi.spec(dmax)?;
    let m = t.degree();
    let tol = if T::EXACT { 0.0 } else { eps_rel() };
    let mut doc = header("transform", src, T::BACKEND);
    doc.insert("phi".into(), json!({
        "roots": t.roots().iter().map(|(z, _)| num(z)).collect::<Vec<_>>(),
        "mults": t.roots().iter().map(|(_, k)| k).collect::<Vec<_>>(),
        "coeffs": poly(&t.phi()),
    }));
    doc.insert("dmax".into(), json!(dmax));
    doc.insert("method".into(), json!(format!("{method:?}").to_lowercase()));
    let mut pass = true;
    let mut tables: Vec<(&str, Type2Table<T>)> = Vec::new();
    if matches!(method, Method::Nnrr | Method::All) {
        let out = transform_nnrr(&sys, &t)?;
        let table = Type2Table::build(&out.lattice, None);
        pass &= out.breakdowns.is_empty();
        doc.insert("nnrr".into(), json!({
            "lattice": output::lattice(&out.lattice),
            "polys": poly_list(&table, dmax),
            "weights": out.weights.iter().map(num).collect::<Vec<_>>(),
            "retried": out.retried,
            "breakdowns": output::breakdowns(&out.breakdowns),
        }));
        tables.push(("nnrr", table));
    }
    if matches!(method, Method::Det | Method::Onestep | Method::All) {
        let base = Type2Table::build(&lattice_for_system(&sys, dmax + m)?, None);
        let caps: Vec<usize> = sys.nvec().iter().map(|c| c.map_or(dmax, |n| n.min(dmax))).collect();
        if matches!(method, Method::Det | Method::All) {
            let mut found = std::collections::BTreeMap::new();
            let mut failed = Vec::new();
            for d in 0..=dmax {
                for k in level_set(sys.rank(), d, &caps) {
                    match transform_type2_det(&base, &k, &t, None) {
                        Ok(p) => {
                            found.insert(k, p);
                        }
                        Err(e) => failed.push(json!({ "index": k, "error": e.to_string() })),
                    }
                }
            }
            let table = Type2Table::from_polys(found);
            pass &= failed.is_empty();
            doc.insert("det".into(), json!({ "polys": poly_list(&table, dmax), "failures": failed }));
            tables.push(("det", table));
        }
        if matches!(method, Method::Onestep | Method::All) {
            let table = transform_type2_iterated(&base, &t);
            let reached: Vec<MultiIndex> = (0..=dmax).flat_map(|d| level_set(sys.rank(), d, &caps)).collect();
            let missing: Vec<&MultiIndex> = reached.iter().filter(|k| table.get(k).is_none()).collect();
            pass &= missing.is_empty();
            doc.insert("onestep".into(), json!({ "polys": poly_list(&table, dmax), "missing": missing }));
            tables.push(("onestep", table));
        }
    }
    if tables.len() > 1 {
        let mut pairs = Vec::new();
        for i in 0..tables.len() {
            for j in i + 1..tables.len() {
                let (dev, missing) = max_dev(&tables[i].1, &tables[j].1);
                let ok = dev <= tol && missing.is_empty();
                pass &= ok;
                pairs.push(json!({
                    "a": tables[i].0, "b": tables[j].0, "max_dev": float(dev), "missing": missing, "pass": ok,
                }));
            }
        }
        doc.insert("agreement".into(), json!({ "tolerance": float(tol), "pairs": pairs }));
    }
    if let (Some(family), true, Some((_, first))) = (src.family(), phi.is_monomial(), tables.first()) {
        if let Some(res) = closed_form::<T>(family, m, dmax) {
            let (label, exact) = res?;
            let (dev, missing) = max_dev(first, &exact);
            let ok = dev <= tol && missing.is_empty();
            pass &= ok;
            doc.insert("closed_form".into(), json!({
                "system": label, "max_dev": float(dev), "missing": missing, "pass": ok,
            }));
        }
    }
    doc.insert("pass".into(), json!(pass));
    Ok(Outcome::new("transform", Value::Object(doc), pass))
}

fn zeros_json<T: Scalar>(p: &Poly<T>) -> Result<(Value, Vec<(f64, f64, usize)>)> {
    if p.degree().is_none_or(|d| d == 0) {
        return Ok((json!({ "zeros": [], "real": true }), Vec::new()));
    }
    let rs = roots(p)?;
    let rows: Vec<(f64, f64, usize)> = rs.values.iter().zip(&rs.multiplicity).map(|(z, m)| (z.re, z.im, *m)).collect();
    let zs: Vec<Value> = rows
        .iter()
        .map(|(re, im, m)| {
            let v = if *im == 0.0 { float(*re) } else { json!([float(*re), float(*im)]) };
            json!({ "value": v, "multiplicity": m })
        })
        .collect();
    Ok((json!({ "zeros": zs, "real": rs.real }), rows))
}

fn polys<T: Scalar>(src: &SystemSource, n: &[usize], kind: PolyType, emit: Emit) -> Result<Outcome> {
    let sys: MopSystem<T> = src.build()?;
    if n.len() != sys.rank() {
        return Err(MopError::Usage(format!("index {n:?} needs {} entries", sys.rank())));
    }
    let components: Vec<Poly<T>> = match kind {
        PolyType::II => vec![type2_coeffs(&lattice_for_system(&sys, index_len(n))?, n)?],
        PolyType::I => type1_solve(&sys, n)?.polys,
    };
    let mut doc = header("polys", src, T::BACKEND);
    doc.insert("index".into(), json!(n));
    doc.insert("type".into(), json!(if kind == PolyType::I { "I" } else { "II" }));
    let mut csv_rows = Vec::new();
    let body: Vec<Value> = match emit {
        Emit::Coeffs => components.iter().map(poly).collect(),
        Emit::Zeros => {
            let mut out = Vec::new();
            for (j, p) in components.iter().enumerate() {
                let (v, rows) = zeros_json(p)?;
                csv_rows.extend(rows.into_iter().map(|r| (j, r)));
                out.push(v);
            }
            out
        }
    };
    let key = if emit == Emit::Coeffs { "coeffs" } else { "zeros" };
    match kind {
        PolyType::II => doc.insert(key.into(), body.into_iter().next().expect("one component")),
        PolyType::I => doc.insert(key.into(), Value::Array(body)),
    };
    let mut out = Outcome::new("polys", Value::Object(doc), true);
    if emit == Emit::Zeros {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| MopError::Usage(format!("csv: {e}"));
        w.write_record(["version", "index", "component", "re", "im", "multiplicity"]).map_err(io)?;
        let idx = n.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        for (j, (re, im, m)) in csv_rows {
            w.write_record([CSV_VERSION.to_string(), idx.clone(), j.to_string(), format!("{re:e}"), format!("{im:e}"), m.to_string()])
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| MopError::Usage(format!("csv: {e}")))?;
        out.artifacts.push(("zeros.csv".into(), bytes));
    }
    Ok(out)
}

fn csv_bytes(rep: &SuiteReport) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    rep.write_csv(&mut buf)?;
    Ok(buf)
}

fn suite_json(rep: &SuiteReport) -> Value {
    json!({
        "family": rep.family,
        "dmax": rep.dmax,
        "rows": rep.rows.len(),
        "failures": rep.rows.iter().filter(|r| !r.pass).map(|r| json!({
            "relation": r.relation, "index": r.index, "axis": r.axis, "verdict": r.verdict,
        })).collect::<Vec<_>>(),
        "min_margin": float(rep.min_margin),
        "pass": rep.pass(),
    })
}

fn interlace(family: &FamilySpec, dmax: usize, mesh: Option<usize>) -> Result<Outcome> {
    let rep = interlacing_suite(family, dmax)?;
    let mut pass = rep.pass();
    let mut doc = json!({ "command": "interlace", "interlacing": suite_json(&rep) });
    let mut artifacts = vec![("interlacing.csv".to_string(), csv_bytes(&rep)?)];
    if let Some(d) = mesh {
        let m = mesh_suite(family, d)?;
        pass &= m.pass();
        doc["mesh"] = suite_json(&m);
        artifacts.push(("mesh.csv".into(), csv_bytes(&m)?));
    }
    doc["pass"] = json!(pass);
    Ok(Outcome { name: "interlace", json: doc, pass, artifacts })
}

fn run_verify(suite: Suite, system: Option<&str>, dmax: Option<usize>) -> Result<Outcome> {
    let cfg = VerifyConfig { system: system.map(str::parse).transpose()?, dmax };
    let rep = verify(suite, &cfg)?;
    let mut out = Outcome::new("verify", rep.to_json(suite), rep.pass());
    if !rep.interlacing.is_empty() {
        out.artifacts.push(("interlacing.csv".into(), csv_bytes(&VerifyReport::merged(&rep.interlacing))?));
    }
    if !rep.mesh.is_empty() {
        out.artifacts.push(("mesh.csv".into(), csv_bytes(&VerifyReport::merged(&rep.mesh))?));
    }
    Ok(out)
}

/// Executes a parsed command.
pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Jacobi { system, len, backend } => {
            let src = input::system(system)?;
            dispatch!(input::backend(&src, false, *backend)?, jacobi(&src, *len))
        }
        Command::Nnrr { system, dmax, backend } => {
            let src = input::system(system)?;
            dispatch!(input::backend(&src, false, *backend)?, nnrr(&src, *dmax))
        }
        Command::Transform { system, phi, spec, weights, dmax, method, backend } => {
            let src = input::system(system)?;
            let mut p = match (phi, spec) {
                (Some(f), None) => input::phi_flag(f, weights.as_deref())?,
                (None, Some(path)) => input::phi_file(path)?,
                _ => return Err(MopError::Usage("give exactly one of --phi and --spec".into())),
            };
            if let (Some(w), Some(_)) = (weights, spec) {
                p.weights = Some(input::rational_list(w)?);
            }
            let d = dmax.or(p.dmax).ok_or_else(|| MopError::Usage("transform needs --dmax or a dmax in the --spec file".into()))?;
            let b = input::backend(&src, p.is_complex(), *backend)?;
            dispatch!(b, transform(&src, &p, d, *method))
        }
        Command::Polys { system, index, kind, emit, backend } => {
            let src = input::system(system)?;
            let n = input::multi_index(index)?;
            dispatch!(input::backend(&src, false, *backend)?, polys(&src, &n, *kind, *emit))
        }
        Command::Interlace { family, dmax, mesh } => interlace(&family.parse()?, *dmax, *mesh),
        Command::Verify { suite, system, dmax } => run_verify(*suite, system.as_deref(), *dmax),
    }
}

fn write_artifacts(dir: &std::path::Path, out: &Outcome, text: &str) -> Result<()> {
    let io = |e: std::io::Error| MopError::Usage(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{}.json", out.name)), text).map_err(io)?;
    for (name, bytes) in &out.artifacts {
        std::fs::write(dir.join(name), bytes).map_err(io)?;
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let eps = match cli.eps {
        Some(v) if v.is_finite() && v > 0.0 => Some(v),
        Some(v) => {
            eprintln!("error: --eps must be positive, got {v}");
            return 2;
        }
        None => match eps_from_env() {
            Ok(v) => v,
            Err(msg) => {
                eprintln!("error: {msg}");
                return 2;
            }
        },
    };
    if let Some(v) = eps {
        set_eps_rel(v);
    }
    match run(&cli.command) {
        Ok(out) => {
            let text = output::to_text(&out.json);
            emit(&text);
            if let Some(dir) = &cli.out {
                if let Err(e) = write_artifacts(dir, &out, &text) {
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            }
            if out.pass { 0 } else { 1 }
        }
        Err(e) => {
            eprintln!("error: {e}");
            emit(&output::to_text(&json!({ "error": e.to_string(), "exit_code": e.exit_code() })));
            e.exit_code()
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}
