//! Systems, transform specs and index lists from flags and JSON files.

use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use crate::christoffel::TransformSpec;
use crate::error::{MopError, Result};
use crate::functionals::{FamilySpec, MomentFunctional, MopSystem};
use crate::numerics::{parse_rational, rational_to_f64, Backend, MultiIndex, Rational, Scalar};

/// A system description before a backend is chosen.
#[derive(Debug, Clone)]
pub enum SystemSource {
    Family(FamilySpec),
    /// Explicit moment lists, one per component.
    Moments(Vec<Vec<Rational>>),
}

impl SystemSource {
    pub fn label(&self) -> String {
        match self {
            SystemSource::Family(f) => f.shorthand(),
            SystemSource::Moments(m) => format!("moments:r={}", m.len()),
        }
    }

    pub fn family(&self) -> Option<&FamilySpec> {
        match self {
            SystemSource::Family(f) => Some(f),
            SystemSource::Moments(_) => None,
        }
    }

    fn exact(&self) -> bool {
        match self {
            SystemSource::Family(f) => (0..f.rank()).all(|j| f.is_exact(j)),
            SystemSource::Moments(_) => true,
        }
    }

    pub fn build<T: Scalar>(&self) -> Result<MopSystem<T>> {
        match self {
            SystemSource::Family(f) => MopSystem::from_family(f.clone()),
            SystemSource::Moments(ms) => MopSystem::new(
                ms.iter()
                    .map(|m| MomentFunctional::from_moments(m.iter().map(T::from_rational).collect()))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MopError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| MopError::Usage(format!("{}: {e}", path.display())))
}

/// A rational from a JSON string (`"p/q"`, decimal) or number.
fn rational(v: &Value) -> Result<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(MopError::Usage(format!("expected a number, got {other}"))),
    };
    parse_rational(&text).ok_or_else(|| MopError::Usage(format!("'{text}' is not a rational number")))
}

/// `name:key=val;…` shorthand, or `@file.json` holding `{"family": "…"}` or
/// `{"moments": [[c_0, c_1, …], …]}`.
pub fn system(arg: &str) -> Result<SystemSource> {
    let Some(path) = arg.strip_prefix('@') else {
        return Ok(SystemSource::Family(arg.parse()?));
    };
    let v = read_json(Path::new(path))?;
    if let Some(f) = v.get("family").and_then(Value::as_str) {
        return Ok(SystemSource::Family(f.parse()?));
    }
    let lists = v
        .get("moments")
        .and_then(Value::as_array)
        .ok_or_else(|| MopError::Usage(format!("{path}: expected a \"family\" or \"moments\" key")))?;
    let ms = lists
        .iter()
        .map(|l| {
            l.as_array()
                .ok_or_else(|| MopError::Usage("each moment list must be an array".into()))?
                .iter()
                .map(rational)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SystemSource::Moments(ms))
}

/// `0,2` or `[0,2]`.
pub fn multi_index(s: &str) -> Result<MultiIndex> {
    s.trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| MopError::Usage(format!("bad index '{s}'"))))
        .collect()
}

/// A root of `Φ`: rational when real, float complex otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Root {
    Real(Rational),
    Complex(Complex64),
}

impl Root {
    fn parse(v: &Value) -> Result<Root> {
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                let im = rational(&parts[1])?;
                let re = rational(&parts[0])?;
                if im == Rational::from_i64(0) {
                    Ok(Root::Real(re))
                } else {
                    Ok(Root::Complex(Complex64::new(rational_to_f64(&re), rational_to_f64(&im))))
                }
            }
            other => rational(other).map(Root::Real),
        }
    }

    fn to_scalar<T: Scalar>(&self) -> Result<T> {
        match self {
            Root::Real(q) => Ok(T::from_rational(q)),
            Root::Complex(z) => T::from_complex(*z).ok_or(MopError::Backend { needed: "complex" }),
        }
    }
}

/// `Φ`, its weights and the transformed depth, backend-free.
#[derive(Debug, Clone)]
pub struct PhiInput {
    pub roots: Vec<Root>,
    pub mults: Vec<usize>,
    pub weights: Option<Vec<Rational>>,
    pub dmax: Option<usize>,
}

impl PhiInput {
    pub fn is_complex(&self) -> bool {
        self.roots.iter().any(|r| matches!(r, Root::Complex(_)))
    }

    /// `Φ = x^m`.
    pub fn is_monomial(&self) -> bool {
        self.roots.iter().all(|r| *r == Root::Real(Rational::from_i64(0)))
    }

    pub fn degree(&self) -> usize {
        self.mults.iter().sum()
    }

    pub fn spec<T: Scalar>(&self, dmax: usize) -> Result<TransformSpec<T>> {
        let roots =
            self.roots.iter().zip(&self.mults).map(|(z, m)| Ok((z.to_scalar()?, *m))).collect::<Result<Vec<_>>>()?;
        let weights = self.weights.as_ref().map(|w| w.iter().map(T::from_rational).collect());
        TransformSpec::new(roots, weights, dmax)
    }
}

fn list(s: &str) -> Vec<&str> {
    s.trim_matches(|c| c == '[' || c == ']').split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

/// Comma-separated rationals, optionally in brackets.
pub fn rational_list(s: &str) -> Result<Vec<Rational>> {
    list(s)
        .into_iter()
        .map(|t| parse_rational(t).ok_or_else(|| MopError::Usage(format!("'{t}' is not a rational number"))))
        .collect()
}

/// `roots=5,7;mults=1,2` (mults default to 1).
pub fn phi_flag(s: &str, weights: Option<&str>) -> Result<PhiInput> {
    let mut roots = None;
    let mut mults = None;
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some(("roots", v)) => roots = Some(rational_list(v)?.into_iter().map(Root::Real).collect::<Vec<_>>()),
            Some(("mults", v)) => {
                mults = Some(
                    list(v)
                        .into_iter()
                        .map(|t| t.parse::<usize>().map_err(|_| MopError::Usage(format!("bad multiplicity '{t}'"))))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            _ => return Err(MopError::Usage(format!("bad --phi part '{part}', expected roots=… or mults=…"))),
        }
    }
    let roots = roots.ok_or_else(|| MopError::Usage("--phi needs roots=…".into()))?;
    let weights = weights.map(rational_list).transpose()?;
    finish(roots, mults, weights, None)
}

/// `{"phi": {"roots": [...], "mults": [...]}, "weights": [...]?, "dmax": d}`;
/// complex roots are `[re, im]`.
pub fn phi_file(path: &Path) -> Result<PhiInput> {
    let v = read_json(path)?;
    let bad = |what: &str| MopError::Usage(format!("{}: {what}", path.display()));
    let phi = v.get("phi").ok_or_else(|| bad("missing \"phi\""))?;
    let roots = phi
        .get("roots")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing \"phi.roots\""))?
        .iter()
        .map(Root::parse)
        .collect::<Result<Vec<_>>>()?;
    let mults = match phi.get("mults") {
        None | Some(Value::Null) => None,
        Some(m) => Some(
            m.as_array()
                .ok_or_else(|| bad("\"phi.mults\" must be an array"))?
                .iter()
                .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| bad("multiplicities are positive integers")))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let weights = match v.get("weights") {
        None | Some(Value::Null) => None,
        Some(w) => Some(
            w.as_array().ok_or_else(|| bad("\"weights\" must be an array"))?.iter().map(rational).collect::<Result<_>>()?,
        ),
    };
    let dmax = match v.get("dmax") {
        None | Some(Value::Null) => None,
        Some(d) => Some(d.as_u64().ok_or_else(|| bad("\"dmax\" must be a nonnegative integer"))? as usize),
    };
    finish(roots, mults, weights, dmax)
}

fn finish(roots: Vec<Root>, mults: Option<Vec<usize>>, weights: Option<Vec<Rational>>, dmax: Option<usize>) -> Result<PhiInput> {
    let mults = mults.unwrap_or_else(|| vec![1; roots.len()]);
    if roots.is_empty() || mults.len() != roots.len() || mults.contains(&0) {
        return Err(MopError::Usage("Φ needs one positive multiplicity per root".into()));
    }
    Ok(PhiInput { roots, mults, weights, dmax })
}

/// Backend for a run: the requested one, else rational when every input is
/// exact, complex when `Φ` has complex roots, float otherwise.
pub fn backend(src: &SystemSource, complex: bool, requested: Option<Backend>) -> Result<Backend> {
    let auto = if complex {
        Backend::Complex
    } else if src.exact() {
        Backend::Rational
    } else {
        Backend::Float
    };
    match requested {
        None => Ok(auto),
        Some(Backend::Rational) if !src.exact() || complex => Err(MopError::Backend { needed: auto.name() }),
        Some(b) if complex && b != Backend::Complex => Err(MopError::Backend { needed: "complex" }),
        Some(b) => Ok(b),
    }
}
