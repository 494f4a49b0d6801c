//! JSON rendering. Exact values become `{"q": "p/q", "f": float}`, reals a
//! plain number and complex values `[re, im]`. Maps are key-sorted, so the
//! output is byte-stable.

use serde_json::{json, Value};

use crate::lattice::NnrrLattice;
use crate::numerics::{format_rational, rational_to_f64, Backend, MultiIndex, Poly, Scalar};

pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn num<T: Scalar>(x: &T) -> Value {
    if T::EXACT {
        if let Some(q) = x.to_rational() {
            return json!({ "q": format_rational(&q), "f": float(rational_to_f64(&q)) });
        }
    }
    let z = x.to_complex();
    match T::BACKEND {
        Backend::Complex => json!([float(z.re), float(z.im)]),
        _ => float(z.re),
    }
}

pub fn opt<T: Scalar>(x: Option<&T>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn poly<T: Scalar>(p: &Poly<T>) -> Value {
    Value::Array(p.coeffs().iter().map(num).collect())
}

pub fn index(n: &[usize]) -> Value {
    json!(n)
}

pub fn breakdowns(list: &[(MultiIndex, usize, usize)]) -> Value {
    Value::Array(list.iter().map(|(n, j, l)| json!({ "index": n, "j": j, "l": l })).collect())
}

/// Every cell of a lattice with its status and coefficients.
pub fn lattice<T: Scalar>(lat: &NnrrLattice<T>) -> Value {
    let cells: Vec<Value> = lat
        .indices()
        .into_iter()
        .filter_map(|n| {
            let c = lat.cell(&n)?;
            Some(json!({
                "index": n,
                "status": c.status.name(),
                "a": c.a.iter().map(|v| opt(v.as_ref())).collect::<Vec<_>>(),
                "b": c.b.iter().map(|v| opt(v.as_ref())).collect::<Vec<_>>(),
            }))
        })
        .collect();
    json!({
        "rank": lat.rank(),
        "dmax": lat.dmax(),
        "caps": lat.caps(),
        "cells": cells,
        "breakdowns": breakdowns(lat.breakdowns()),
    })
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
