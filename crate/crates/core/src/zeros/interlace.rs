use crate::error::{MopError, Result};
use crate::numerics::tol::INTERLACE_MARGIN;

use super::RootSet;

/// Orientation of two strictly interlacing zero sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Interlacing {
    /// `u ≺ v`: `z_1(u) < z_1(v) < z_2(u) < …`.
    StrictBelow,
    /// `u ≻ v`: `z_1(v) < z_1(u) < z_2(v) < …`.
    StrictAbove,
    /// Both sets empty.
    Interlaced,
    No,
}

impl Interlacing {
    pub fn holds(self) -> bool {
        self != Interlacing::No
    }

    pub fn name(self) -> &'static str {
        match self {
            Interlacing::StrictBelow => "below",
            Interlacing::StrictAbove => "above",
            Interlacing::Interlaced => "interlaced",
            Interlacing::No => "no",
        }
    }
}

/// Verdict with the smallest relative gap between neighbouring zeros of the
/// merged sequence.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InterlaceReport {
    pub verdict: Interlacing,
    /// `min |x_{i+1} - x_i| / max(1, |x_i|, |x_{i+1}|)` over the merged zeros.
    pub margin: f64,
}

/// [`interlace_with`] at the default margin `τ = 1e-9`.
pub fn interlace(u: &RootSet, v: &RootSet) -> Result<Interlacing> {
    interlace_with(u, v, INTERLACE_MARGIN).map(|r| r.verdict)
}

/// Strict interlacing test. Complex or repeated zeros give `No`, as do
/// coincident zeros. A gap that is positive but within `tau` of the local
/// scale is `ToleranceAmbiguous`.
pub fn interlace_with(u: &RootSet, v: &RootSet, tau: f64) -> Result<InterlaceReport> {
    let (nu, nv) = (u.len(), v.len());
    if nu.abs_diff(nv) > 1 {
        return Err(MopError::Usage(format!("interlacing needs degrees within one, got {nu} and {nv}")));
    }
    let no = InterlaceReport { verdict: Interlacing::No, margin: 0.0 };
    if !u.real || !v.real || !u.is_simple() || !v.is_simple() {
        return Ok(no);
    }
    let mut merged: Vec<(f64, bool)> =
        u.reals().into_iter().map(|x| (x, true)).chain(v.reals().into_iter().map(|x| (x, false))).collect();
    if merged.is_empty() {
        return Ok(InterlaceReport { verdict: Interlacing::Interlaced, margin: f64::INFINITY });
    }
    merged.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut margin = f64::INFINITY;
    let mut alternates = true;
    for w in merged.windows(2) {
        let gap = w[1].0 - w[0].0;
        if gap == 0.0 {
            return Ok(no);
        }
        let rel = gap / 1f64.max(w[0].0.abs()).max(w[1].0.abs());
        if rel <= tau {
            return Err(MopError::ToleranceAmbiguous(format!(
                "zeros {} and {} are closer than the margin {tau}",
                w[0].0, w[1].0
            )));
        }
        margin = margin.min(rel);
        alternates &= w[0].1 != w[1].1;
    }
    if !alternates {
        return Ok(InterlaceReport { verdict: Interlacing::No, margin });
    }
    let verdict = if merged[0].1 { Interlacing::StrictBelow } else { Interlacing::StrictAbove };
    Ok(InterlaceReport { verdict, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Poly;
    use crate::zeros::roots;

    fn rs(r: &[f64]) -> RootSet {
        roots(&Poly::from_roots(&r.iter().map(|&x| (x, 1)).collect::<Vec<_>>())).unwrap()
    }

    #[test]
    fn orientation_and_failures() {
        assert_eq!(interlace(&rs(&[0.0]), &rs(&[-1.0, 1.0])).unwrap(), Interlacing::StrictAbove);
        assert_eq!(interlace(&rs(&[-1.0, 1.0]), &rs(&[0.0])).unwrap(), Interlacing::StrictBelow);
        let u = rs(&[1.0, 3.0]);
        assert_eq!(interlace(&u, &u).unwrap(), Interlacing::No);
        assert_eq!(interlace(&rs(&[1.0, 2.0]), &rs(&[3.0, 4.0])).unwrap(), Interlacing::No);
        // x(x-2) against x^2 - 4x + 2
        let p = roots(&Poly::new(vec![2.0, -4.0, 1.0])).unwrap();
        assert_eq!(interlace(&rs(&[0.0, 2.0]), &p).unwrap(), Interlacing::StrictBelow);
        assert!(matches!(
            interlace(&rs(&[1.0]), &rs(&[1.0 + 1e-12, 5.0])),
            Err(MopError::ToleranceAmbiguous(_))
        ));
    }
}
