//! Catalog of classical multiple orthogonality systems.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::quadrature::{gauss_jacobi, gauss_laguerre, map_interval, Discretization};
use crate::error::{MopError, Result};
use crate::numerics::{format_rational, rational_to_f64, Poly, Rational, Scalar};

/// Number of Gauss nodes used to discretize the quadrature families.
pub const QUADRATURE_NODES: usize = 160;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Laguerre1 { alphas: Vec<Rational> },
    Laguerre2 { cs: Vec<Rational>, alpha: Rational },
    JacobiPineiro { alphas: Vec<Rational>, beta: Rational },
    AngelescoJacobi { alpha: Rational, beta: Rational, gamma: Rational, a: Rational },
    JacobiLaguerre { beta: Rational, gamma: Rational, a: Rational },
    JacobiHermite { gamma: Rational },
    Charlier { a: Vec<Rational> },
    Meixner1 { cs: Vec<Rational>, beta: Rational },
    Meixner2 { c: Rational, betas: Vec<Rational> },
    Krawtchouk { n: u32, ps: Vec<Rational> },
    Hahn { alphas: Vec<Rational>, beta: Rational, n: u32 },
}

fn q(v: i64) -> Rational {
    Rational::from_i64(v)
}

fn is_integer(x: &Rational) -> bool {
    x.is_integer()
}

fn nonneg_int(x: &Rational) -> Option<u32> {
    (x.is_integer() && !x.is_negative()).then(|| x.to_integer().to_u32()).flatten()
}

fn pochhammer(x: &Rational, k: usize) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * (x + q(i as i64)))
}

/// Coefficients of a polynomial with rational coefficients.
fn poly_pow(base: &Poly<Rational>, e: u32) -> Poly<Rational> {
    (0..e).fold(Poly::one(), |acc, _| acc.mul(base))
}

fn stirling2(nmax: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::from(0); nmax + 1]; nmax + 1];
    s[0][0] = BigInt::from(1);
    for n in 1..=nmax {
        for k in 1..=n {
            s[n][k] = BigInt::from(k) * &s[n - 1][k] + &s[n - 1][k - 1];
        }
    }
    s
}

fn from_factorial_moments(f: impl Fn(usize) -> Rational, count: usize) -> Vec<Rational> {
    if count == 0 {
        return Vec::new();
    }
    let s = stirling2(count - 1);
    let fk: Vec<Rational> = (0..count).map(f).collect();
    (0..count)
        .map(|n| {
            (0..=n).fold(Rational::zero(), |acc, k| {
                acc + Rational::from_integer(s[n][k].clone()) * &fk[k]
            })
        })
        .collect()
}

fn distinct(v: &[Rational]) -> bool {
    v.iter().enumerate().all(|(i, x)| v[..i].iter().all(|y| y != x))
}

fn diffs_not_integer(v: &[Rational]) -> bool {
    v.iter()
        .enumerate()
        .all(|(i, x)| v[..i].iter().all(|y| !is_integer(&(x - y))))
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Laguerre1 { .. } => "laguerre1",
            FamilySpec::Laguerre2 { .. } => "laguerre2",
            FamilySpec::JacobiPineiro { .. } => "jacobi_pineiro",
            FamilySpec::AngelescoJacobi { .. } => "angelesco_jacobi",
            FamilySpec::JacobiLaguerre { .. } => "jacobi_laguerre",
            FamilySpec::JacobiHermite { .. } => "jacobi_hermite",
            FamilySpec::Charlier { .. } => "charlier",
            FamilySpec::Meixner1 { .. } => "meixner1",
            FamilySpec::Meixner2 { .. } => "meixner2",
            FamilySpec::Krawtchouk { .. } => "krawtchouk",
            FamilySpec::Hahn { .. } => "hahn",
        }
    }

    /// Number of functionals in the system.
    pub fn rank(&self) -> usize {
        match self {
            FamilySpec::Laguerre1 { alphas } => alphas.len(),
            FamilySpec::Laguerre2 { cs, .. } => cs.len(),
            FamilySpec::JacobiPineiro { alphas, .. } => alphas.len(),
            FamilySpec::AngelescoJacobi { .. }
            | FamilySpec::JacobiLaguerre { .. }
            | FamilySpec::JacobiHermite { .. } => 2,
            FamilySpec::Charlier { a } => a.len(),
            FamilySpec::Meixner1 { cs, .. } => cs.len(),
            FamilySpec::Meixner2 { betas, .. } => betas.len(),
            FamilySpec::Krawtchouk { ps, .. } => ps.len(),
            FamilySpec::Hahn { alphas, .. } => alphas.len(),
        }
    }

    /// Number of support points, `None` for infinite support.
    pub fn support_size(&self) -> Option<usize> {
        match self {
            FamilySpec::Krawtchouk { n, .. } | FamilySpec::Hahn { n, .. } => Some(*n as usize + 1),
            _ => None,
        }
    }

    /// Checks the parameter constraints of the family.
    pub fn validate(&self) -> Result<()> {
        let m1 = q(-1);
        let zero = q(0);
        let one = q(1);
        let err = |msg: &str| Err(MopError::Domain(format!("{}: {msg}", self.name())));
        if self.rank() == 0 {
            return err("at least one functional is required");
        }
        match self {
            FamilySpec::Laguerre1 { alphas } => {
                if alphas.iter().any(|a| *a <= m1) {
                    return err("alpha_j > -1 required");
                }
                if !diffs_not_integer(alphas) {
                    return err("alpha_j - alpha_k must not be an integer");
                }
            }
            FamilySpec::Laguerre2 { cs, alpha } => {
                if *alpha <= m1 {
                    return err("alpha > -1 required");
                }
                if cs.iter().any(|c| *c <= zero) || !distinct(cs) {
                    return err("c_j > 0 and pairwise distinct required");
                }
            }
            FamilySpec::JacobiPineiro { alphas, beta } => {
                if *beta <= m1 || alphas.iter().any(|a| *a <= m1) {
                    return err("alpha_j > -1 and beta > -1 required");
                }
                if !diffs_not_integer(alphas) {
                    return err("alpha_j - alpha_k must not be an integer");
                }
            }
            FamilySpec::AngelescoJacobi { alpha, beta, gamma, a } => {
                if *alpha <= m1 || *beta <= m1 || *gamma <= m1 {
                    return err("alpha, beta, gamma > -1 required");
                }
                if *a >= zero {
                    return err("a < 0 required");
                }
            }
            FamilySpec::JacobiLaguerre { beta, gamma, a } => {
                if *beta <= m1 || *gamma <= m1 {
                    return err("beta, gamma > -1 required");
                }
                if *a >= zero {
                    return err("a < 0 required");
                }
            }
            FamilySpec::JacobiHermite { gamma } => {
                if *gamma <= m1 {
                    return err("gamma > -1 required");
                }
            }
            FamilySpec::Charlier { a } => {
                if a.iter().any(|v| *v <= zero) || !distinct(a) {
                    return err("a_j > 0 and pairwise distinct required");
                }
            }
            FamilySpec::Meixner1 { cs, beta } => {
                if *beta <= zero {
                    return err("beta > 0 required");
                }
                if cs.iter().any(|c| *c <= zero || *c >= one) || !distinct(cs) {
                    return err("0 < c_j < 1 and pairwise distinct required");
                }
            }
            FamilySpec::Meixner2 { c, betas } => {
                if *c <= zero || *c >= one {
                    return err("0 < c < 1 required");
                }
                if betas.iter().any(|b| *b <= zero) {
                    return err("beta_j > 0 required");
                }
                if !diffs_not_integer(betas) {
                    return err("beta_j - beta_k must not be an integer");
                }
            }
            FamilySpec::Krawtchouk { n, ps } => {
                if *n == 0 {
                    return err("N > 0 required");
                }
                if ps.iter().any(|p| *p <= zero || *p >= one) || !distinct(ps) {
                    return err("0 < p_j < 1 and pairwise distinct required");
                }
            }
            FamilySpec::Hahn { alphas, beta, n } => {
                if *n == 0 {
                    return err("N > 0 required");
                }
                if *beta <= m1 || alphas.iter().any(|a| *a <= m1) {
                    return err("alpha_j > -1 and beta > -1 required");
                }
                if !distinct(alphas) {
                    return err("alpha_j pairwise distinct required");
                }
            }
        }
        Ok(())
    }

    /// Whether component `j` has exactly computable rational moments.
    pub fn is_exact(&self, j: usize) -> bool {
        match self {
            FamilySpec::JacobiHermite { .. } => false,
            FamilySpec::AngelescoJacobi { alpha, beta, gamma, .. } => {
                [alpha, beta, gamma].iter().all(|v| nonneg_int(v).is_some())
            }
            FamilySpec::JacobiLaguerre { beta, gamma, .. } => {
                j == 1 && nonneg_int(beta).is_some() && nonneg_int(gamma).is_some()
            }
            _ => true,
        }
    }

    /// First `count` moments of component `j`, when they are rational.
    pub fn exact_moments(&self, j: usize, count: usize) -> Option<Vec<Rational>> {
        if !self.is_exact(j) {
            return None;
        }
        let out = match self {
            FamilySpec::Laguerre1 { alphas } => {
                let a1 = &alphas[j] + q(1);
                (0..count).map(|n| pochhammer(&a1, n)).collect()
            }
            FamilySpec::Laguerre2 { cs, alpha } => {
                let a1 = alpha + q(1);
                let mut out = Vec::with_capacity(count);
                let mut acc = Rational::one();
                for n in 0..count {
                    out.push(acc.clone());
                    acc = acc * (&a1 + q(n as i64)) / &cs[j];
                }
                out
            }
            FamilySpec::JacobiPineiro { alphas, beta } => {
                let num = &alphas[j] + q(1);
                let den = &alphas[j] + beta + q(2);
                let mut out = Vec::with_capacity(count);
                let mut acc = Rational::one();
                for n in 0..count {
                    out.push(acc.clone());
                    let k = q(n as i64);
                    acc = acc * (&num + &k) / (&den + k);
                }
                out
            }
            FamilySpec::AngelescoJacobi { alpha, beta, gamma, a } => {
                let (al, be, ga) = (nonneg_int(alpha)?, nonneg_int(beta)?, nonneg_int(gamma)?);
                let one_minus_x = Poly::new(vec![q(1), q(-1)]);
                let x_minus_a = Poly::linear(a.clone());
                let w = poly_pow(&one_minus_x, al).mul(&poly_pow(&x_minus_a, be));
                if j == 0 {
                    // |x|^γ = (-x)^γ on [a, 0]
                    let w = w.mul(&poly_pow(&Poly::new(vec![q(0), q(-1)]), ga));
                    (0..count)
                        .map(|n| {
                            w.coeffs().iter().enumerate().fold(Rational::zero(), |acc, (k, wk)| {
                                let p = (n + k + 1) as i32;
                                acc - wk * pow_rat(a, p) / q(p as i64)
                            })
                        })
                        .collect()
                } else {
                    let w = w.mul(&Poly::monomial(ga as usize));
                    (0..count)
                        .map(|n| {
                            w.coeffs().iter().enumerate().fold(Rational::zero(), |acc, (k, wk)| {
                                acc + wk / q((n + k + 1) as i64)
                            })
                        })
                        .collect()
                }
            }
            FamilySpec::JacobiLaguerre { beta, gamma, a } => {
                let (be, ga) = (nonneg_int(beta)?, nonneg_int(gamma)?);
                let w = poly_pow(&Poly::linear(a.clone()), be).mul(&Poly::monomial(ga as usize));
                let fact = factorials(count + w.coeffs().len());
                (0..count)
                    .map(|n| {
                        w.coeffs()
                            .iter()
                            .enumerate()
                            .fold(Rational::zero(), |acc, (k, wk)| acc + wk * &fact[n + k])
                    })
                    .collect()
            }
            FamilySpec::JacobiHermite { .. } => return None,
            FamilySpec::Charlier { a } => from_factorial_moments(|k| pow_rat(&a[j], k as i32), count),
            FamilySpec::Meixner1 { cs, beta } => {
                let ratio = &cs[j] / (q(1) - &cs[j]);
                from_factorial_moments(|k| pochhammer(beta, k) * pow_rat(&ratio, k as i32), count)
            }
            FamilySpec::Meixner2 { c, betas } => {
                let ratio = c / (q(1) - c);
                from_factorial_moments(|k| pochhammer(&betas[j], k) * pow_rat(&ratio, k as i32), count)
            }
            FamilySpec::Krawtchouk { n, ps } => {
                let nn = *n as i64;
                from_factorial_moments(
                    |k| {
                        let falling = (0..k as i64).fold(Rational::one(), |acc, i| acc * q(nn - i));
                        falling * pow_rat(&ps[j], k as i32)
                    },
                    count,
                )
            }
            FamilySpec::Hahn { .. } => {
                let (pts, wts) = self.mass_points(j)?;
                (0..count)
                    .map(|n| {
                        pts.iter().zip(&wts).fold(Rational::zero(), |acc, (x, w)| {
                            acc + w * pow_rat(x, n as i32)
                        })
                    })
                    .collect()
            }
        };
        Some(out)
    }

    /// Explicit mass points and weights for the finite discrete families.
    pub fn mass_points(&self, j: usize) -> Option<(Vec<Rational>, Vec<Rational>)> {
        match self {
            FamilySpec::Hahn { alphas, beta, n } => {
                let nn = *n as usize;
                let a1 = &alphas[j] + q(1);
                let b1 = beta + q(1);
                let fact = factorials(nn + 1);
                let pts = (0..=nn).map(|k| q(k as i64)).collect();
                let wts = (0..=nn)
                    .map(|k| {
                        pochhammer(&a1, k) * pochhammer(&b1, nn - k) / (&fact[k] * &fact[nn - k])
                    })
                    .collect();
                Some((pts, wts))
            }
            FamilySpec::Krawtchouk { n, ps } => {
                let nn = *n as usize;
                let p = &ps[j];
                let fact = factorials(nn + 1);
                let pts = (0..=nn).map(|k| q(k as i64)).collect();
                let wts = (0..=nn)
                    .map(|k| {
                        &fact[nn] / (&fact[k] * &fact[nn - k])
                            * pow_rat(p, k as i32)
                            * pow_rat(&(q(1) - p), (nn - k) as i32)
                    })
                    .collect();
                Some((pts, wts))
            }
            _ => None,
        }
    }

    /// Dense discretization used for float moments and Stieltjes marginals of the quadrature families.
    pub fn discretization(&self, j: usize) -> Option<Discretization> {
        let f = rational_to_f64;
        match self {
            FamilySpec::AngelescoJacobi { alpha, beta, gamma, a } => {
                let (al, be, ga, af) = (f(alpha), f(beta), f(gamma), f(a));
                if j == 0 {
                    // (x-a)^β at the left end, |x|^γ at the right end of [a, 0].
                    let g = gauss_jacobi(QUADRATURE_NODES, ga, be);
                    let h = -0.5 * af;
                    let d = map_interval(&g, af, 0.0);
                    let scale = h.powf(be + ga);
                    Some(d.reweighted(|x| (1.0 - x).powf(al) * scale))
                } else {
                    let g = gauss_jacobi(QUADRATURE_NODES, al, ga);
                    let d = map_interval(&g, 0.0, 1.0);
                    let scale = 0.5f64.powf(al + ga);
                    Some(d.reweighted(|x| (x - af).powf(be) * scale))
                }
            }
            FamilySpec::JacobiLaguerre { beta, gamma, a } => {
                let (be, ga, af) = (f(beta), f(gamma), f(a));
                if j == 0 {
                    let g = gauss_jacobi(QUADRATURE_NODES, ga, be);
                    let h = -0.5 * af;
                    let d = map_interval(&g, af, 0.0);
                    let scale = h.powf(be + ga);
                    Some(d.reweighted(|x| (-x).exp() * scale))
                } else {
                    let g = gauss_laguerre(QUADRATURE_NODES, ga);
                    Some(g.reweighted(|x| (x - af).powf(be)))
                }
            }
            _ => None,
        }
    }

    /// First `count` moments of component `j` in double precision.
    pub fn float_moments(&self, j: usize, count: usize) -> Vec<f64> {
        if let Some(ex) = self.exact_moments(j, count) {
            return ex.iter().map(rational_to_f64).collect();
        }
        if let FamilySpec::JacobiHermite { gamma } = self {
            let g = f64::from_rational(gamma);
            return (0..count)
                .map(|n| {
                    let nf = n as f64;
                    let lg = libm::lgamma(0.5 * (nf + g + 1.0));
                    if j == 0 {
                        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                        sign * 0.5 * lg.exp()
                    } else {
                        (0.5 * (nf + g - 1.0) * std::f64::consts::LN_2 + lg).exp()
                    }
                })
                .collect();
        }
        let d = self.discretization(j).expect("quadrature family");
        (0..count).map(|n| d.moment(n)).collect()
    }

    /// Same family with parameter `key` shifted by `delta` on every axis.
    pub fn shifted(&self, key: &str, delta: i64) -> Result<FamilySpec> {
        let d = q(delta);
        let add_all = |v: &[Rational]| v.iter().map(|x| x + &d).collect::<Vec<_>>();
        let bad = || MopError::Usage(format!("{} has no parameter '{key}'", self.name()));
        let mut out = self.clone();
        match (&mut out, key) {
            (FamilySpec::Laguerre1 { alphas }, "alpha") => *alphas = add_all(alphas),
            (FamilySpec::Laguerre2 { alpha, .. }, "alpha") => *alpha += &d,
            (FamilySpec::JacobiPineiro { alphas, .. }, "alpha") => *alphas = add_all(alphas),
            (FamilySpec::JacobiPineiro { beta, .. }, "beta") => *beta += &d,
            (FamilySpec::AngelescoJacobi { alpha, .. }, "alpha") => *alpha += &d,
            (FamilySpec::AngelescoJacobi { beta, .. }, "beta") => *beta += &d,
            (FamilySpec::AngelescoJacobi { gamma, .. }, "gamma") => *gamma += &d,
            (FamilySpec::JacobiLaguerre { beta, .. }, "beta") => *beta += &d,
            (FamilySpec::JacobiLaguerre { gamma, .. }, "gamma") => *gamma += &d,
            (FamilySpec::JacobiHermite { gamma }, "gamma") => *gamma += &d,
            (FamilySpec::Meixner1 { beta, .. }, "beta") => *beta += &d,
            (FamilySpec::Meixner2 { betas, .. }, "beta") => *betas = add_all(betas),
            (FamilySpec::Krawtchouk { n, .. }, "n") => *n = shift_u32(*n, delta).ok_or_else(bad)?,
            (FamilySpec::Hahn { n, .. }, "n") => *n = shift_u32(*n, delta).ok_or_else(bad)?,
            _ => return Err(bad()),
        }
        out.validate()?;
        Ok(out)
    }

    /// Shorthand rendering `name:key=v1,v2;key=v`.
    pub fn shorthand(&self) -> String {
        let list = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(",");
        let one = format_rational;
        let body = match self {
            FamilySpec::Laguerre1 { alphas } => format!("alpha={}", list(alphas)),
            FamilySpec::Laguerre2 { cs, alpha } => format!("c={};alpha={}", list(cs), one(alpha)),
            FamilySpec::JacobiPineiro { alphas, beta } => {
                format!("alpha={};beta={}", list(alphas), one(beta))
            }
            FamilySpec::AngelescoJacobi { alpha, beta, gamma, a } => format!(
                "alpha={};beta={};gamma={};a={}",
                one(alpha),
                one(beta),
                one(gamma),
                one(a)
            ),
            FamilySpec::JacobiLaguerre { beta, gamma, a } => {
                format!("beta={};gamma={};a={}", one(beta), one(gamma), one(a))
            }
            FamilySpec::JacobiHermite { gamma } => format!("gamma={}", one(gamma)),
            FamilySpec::Charlier { a } => format!("a={}", list(a)),
            FamilySpec::Meixner1 { cs, beta } => format!("c={};beta={}", list(cs), one(beta)),
            FamilySpec::Meixner2 { c, betas } => format!("c={};beta={}", one(c), list(betas)),
            FamilySpec::Krawtchouk { n, ps } => format!("n={n};p={}", list(ps)),
            FamilySpec::Hahn { alphas, beta, n } => {
                format!("alpha={};beta={};n={n}", list(alphas), one(beta))
            }
        };
        format!("{}:{}", self.name(), body)
    }
}

/// Splits a shorthand body into `(key, values)` pairs. Keys are separated by
/// `;` or `,`; a token without `=` extends the previous key's value list, and
/// brackets around a list are optional.
fn shorthand_pairs(body: &str) -> Result<Vec<(String, Vec<String>)>> {
    let bad = |msg: &str| MopError::Usage(format!("bad family shorthand '{body}': {msg}"));
    let mut pairs: Vec<(String, Vec<String>)> = Vec::new();
    let mut depth = 0usize;
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in body.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.checked_sub(1).ok_or_else(|| bad("unbalanced ']'"))?,
            ';' | ',' => tokens.push(std::mem::take(&mut cur)),
            c if c.is_whitespace() => {}
            c => cur.push(c),
        }
    }
    if depth != 0 {
        return Err(bad("unbalanced '['"));
    }
    tokens.push(cur);
    for tok in tokens.into_iter().filter(|t| !t.is_empty()) {
        match tok.split_once('=') {
            Some((k, v)) if !k.is_empty() => pairs.push((k.to_ascii_lowercase(), vec![v.to_string()])),
            Some(_) => return Err(bad("empty key")),
            None => pairs.last_mut().ok_or_else(|| bad("value before any key"))?.1.push(tok),
        }
    }
    Ok(pairs)
}

impl std::str::FromStr for FamilySpec {
    type Err = MopError;

    /// Parses `name:key=v1,v2;key=v`, e.g. `charlier:a=1,2` or
    /// `hahn:alpha=[0,1/2],beta=1,n=8`. Plural key spellings (`alphas`,
    /// `cs`, `betas`, `ps`) are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let name = name.to_ascii_lowercase().replace('-', "_");
        let mut pairs = shorthand_pairs(body)?;
        for (k, _) in &mut pairs {
            let canon = match k.as_str() {
                "alphas" => "alpha",
                "betas" => "beta",
                "cs" => "c",
                "ps" => "p",
                "big_n" => "n",
                other => other,
            };
            *k = canon.to_string();
        }
        let mut seen = std::collections::BTreeSet::new();
        for (k, _) in &pairs {
            if !seen.insert(k.clone()) {
                return Err(MopError::Usage(format!("parameter '{k}' given twice")));
            }
        }
        let take = |key: &str| -> Result<Vec<Rational>> {
            let (_, vals) = pairs
                .iter()
                .find(|(k, _)| k == key)
                .ok_or_else(|| MopError::Usage(format!("{name} needs parameter '{key}'")))?;
            vals.iter()
                .map(|v| {
                    crate::numerics::parse_rational(v)
                        .ok_or_else(|| MopError::Usage(format!("'{v}' is not a rational number")))
                })
                .collect()
        };
        let one = |key: &str| -> Result<Rational> {
            let mut v = take(key)?;
            if v.len() != 1 {
                return Err(MopError::Usage(format!("parameter '{key}' takes one value")));
            }
            Ok(v.remove(0))
        };
        let size = |key: &str| -> Result<u32> {
            nonneg_int(&one(key)?).ok_or_else(|| MopError::Domain(format!("'{key}' must be a nonnegative integer")))
        };
        let allowed: &[&str] = match name.as_str() {
            "laguerre1" => &["alpha"],
            "laguerre2" => &["c", "alpha"],
            "jacobi_pineiro" => &["alpha", "beta"],
            "angelesco_jacobi" => &["alpha", "beta", "gamma", "a"],
            "jacobi_laguerre" => &["beta", "gamma", "a"],
            "jacobi_hermite" => &["gamma"],
            "charlier" => &["a"],
            "meixner1" | "meixner2" => &["c", "beta"],
            "krawtchouk" => &["n", "p"],
            "hahn" => &["alpha", "beta", "n"],
            _ => return Err(MopError::Usage(format!("unknown family '{name}'"))),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(MopError::Usage(format!("{name} has no parameter '{k}'")));
        }
        let spec = match name.as_str() {
            "laguerre1" => FamilySpec::Laguerre1 { alphas: take("alpha")? },
            "laguerre2" => FamilySpec::Laguerre2 { cs: take("c")?, alpha: one("alpha")? },
            "jacobi_pineiro" => FamilySpec::JacobiPineiro { alphas: take("alpha")?, beta: one("beta")? },
            "angelesco_jacobi" => FamilySpec::AngelescoJacobi {
                alpha: one("alpha")?,
                beta: one("beta")?,
                gamma: one("gamma")?,
                a: one("a")?,
            },
            "jacobi_laguerre" => FamilySpec::JacobiLaguerre { beta: one("beta")?, gamma: one("gamma")?, a: one("a")? },
            "jacobi_hermite" => FamilySpec::JacobiHermite { gamma: one("gamma")? },
            "charlier" => FamilySpec::Charlier { a: take("a")? },
            "meixner1" => FamilySpec::Meixner1 { cs: take("c")?, beta: one("beta")? },
            "meixner2" => FamilySpec::Meixner2 { c: one("c")?, betas: take("beta")? },
            "krawtchouk" => FamilySpec::Krawtchouk { n: size("n")?, ps: take("p")? },
            _ => FamilySpec::Hahn { alphas: take("alpha")?, beta: one("beta")?, n: size("n")? },
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn shift_u32(n: u32, d: i64) -> Option<u32> {
    u32::try_from(n as i64 + d).ok().filter(|v| *v > 0)
}

fn pow_rat(x: &Rational, k: i32) -> Rational {
    num_traits::pow::Pow::pow(x, k)
}

fn factorials(n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigInt::from(1);
    out.push(Rational::one());
    for k in 1..=n {
        acc *= BigInt::from(k);
        out.push(Rational::from_integer(acc.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qq(p: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(p), BigInt::from(d))
    }

    fn ints(v: &[Rational]) -> Vec<i64> {
        v.iter().map(|x| x.to_integer().to_i64().unwrap()).collect()
    }

    /// Σ_k k^n a^k/k! e^{-a}, summed until the tail is negligible.
    fn poisson_moment(a: f64, n: i32) -> f64 {
        let mut term = (-a).exp();
        let mut s = 0.0;
        for k in 0..200 {
            if k > 0 {
                term *= a / k as f64;
            }
            s += term * (k as f64).powi(n);
        }
        s
    }

    #[test]
    fn shorthand_parses_and_round_trips() {
        let f: FamilySpec = "charlier:a=1,2".parse().unwrap();
        assert_eq!(f, FamilySpec::Charlier { a: vec![q(1), q(2)] });
        let h: FamilySpec = "hahn:alpha=[0,1/2],beta=1,n=8".parse().unwrap();
        assert_eq!(h, FamilySpec::Hahn { alphas: vec![q(0), qq(1, 2)], beta: q(1), n: 8 });
        for s in [
            "laguerre1:alpha=0",
            "laguerre2:c=1,2;alpha=0",
            "jacobi_pineiro:alpha=0,1/2;beta=0",
            "angelesco_jacobi:alpha=0;beta=0;gamma=0;a=-1",
            "meixner2:c=1/2;beta=1,3/2",
            "krawtchouk:n=10;p=1/4,2/3",
        ] {
            let f: FamilySpec = s.parse().unwrap();
            assert_eq!(f.shorthand(), s);
        }
        assert!("charlier:b=1".parse::<FamilySpec>().is_err());
        assert!("bessel:a=1".parse::<FamilySpec>().is_err());
        assert!("charlier:a=1;a=2".parse::<FamilySpec>().is_err());
        assert!(matches!("charlier:a=-1".parse::<FamilySpec>(), Err(MopError::Domain(_))));
    }

    #[test]
    fn charlier_moments_are_bell_numbers() {
        let f = FamilySpec::Charlier { a: vec![q(1)] };
        let m = f.exact_moments(0, 6).unwrap();
        assert_eq!(ints(&m), vec![1, 1, 2, 5, 15, 52]);
        for (n, c) in m.iter().enumerate() {
            assert!((rational_to_f64(c) - poisson_moment(1.0, n as i32)).abs() < 1e-10);
        }
    }

    #[test]
    fn charlier_rational_parameter_against_series() {
        let f = FamilySpec::Charlier { a: vec![qq(3, 10)] };
        let m = f.exact_moments(0, 8).unwrap();
        for (n, c) in m.iter().enumerate() {
            assert!((rational_to_f64(c) - poisson_moment(0.3, n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn krawtchouk_matches_binomial_sum() {
        let f = FamilySpec::Krawtchouk { n: 5, ps: vec![qq(1, 3)] };
        let m = f.exact_moments(0, 9).unwrap();
        let (pts, wts) = f.mass_points(0).unwrap();
        for (n, c) in m.iter().enumerate() {
            let direct = pts
                .iter()
                .zip(&wts)
                .fold(Rational::zero(), |acc, (x, w)| acc + w * pow_rat(x, n as i32));
            assert_eq!(*c, direct);
        }
    }

    #[test]
    fn meixner_factorial_moments_against_series() {
        // Σ_k (β)_k c^k/k! k^n normalized by (1-c)^{-β}
        let f = FamilySpec::Meixner1 { cs: vec![qq(1, 3)], beta: q(2) };
        let m = f.exact_moments(0, 6).unwrap();
        let (c, b) = (1.0 / 3.0f64, 2.0);
        for (n, val) in m.iter().enumerate() {
            let mut term = 1.0;
            let mut s = 0.0;
            for k in 0..400 {
                if k > 0 {
                    term *= (b + k as f64 - 1.0) * c / k as f64;
                }
                s += term * (k as f64).powi(n as i32);
            }
            s *= (1.0 - c).powf(b);
            assert!((rational_to_f64(val) - s).abs() < 1e-9 * s.max(1.0));
        }
    }

    #[test]
    fn pochhammer_families() {
        let l = FamilySpec::Laguerre1 { alphas: vec![q(0)] };
        assert_eq!(ints(&l.exact_moments(0, 5).unwrap()), vec![1, 1, 2, 6, 24]);
        let jp = FamilySpec::JacobiPineiro { alphas: vec![q(0)], beta: q(0) };
        assert_eq!(jp.exact_moments(0, 3).unwrap(), vec![q(1), qq(1, 2), qq(1, 3)]);
    }

    #[test]
    fn angelesco_exact_matches_quadrature() {
        let f = FamilySpec::AngelescoJacobi { alpha: q(1), beta: q(0), gamma: q(2), a: q(-1) };
        for j in 0..2 {
            let ex = f.exact_moments(j, 10).unwrap();
            let d = f.discretization(j).unwrap();
            for (n, c) in ex.iter().enumerate() {
                assert!((rational_to_f64(c) - d.moment(n)).abs() < 1e-13, "j={j} n={n}");
            }
        }
    }

    #[test]
    fn jacobi_laguerre_components() {
        let f = FamilySpec::JacobiLaguerre { beta: q(1), gamma: q(0), a: q(-1) };
        assert!(!f.is_exact(0));
        let ex = f.exact_moments(1, 6).unwrap();
        let d = f.discretization(1).unwrap();
        for (n, c) in ex.iter().enumerate() {
            let v = rational_to_f64(c);
            assert!((v - d.moment(n)).abs() < 1e-10 * v);
        }
        // ∫_{-1}^{0} (x+1) e^{-x} dx = e - 2
        let m0 = f.float_moments(0, 1)[0];
        assert!((m0 - (std::f64::consts::E - 2.0)).abs() < 1e-13);
    }

    #[test]
    fn jacobi_hermite_closed_forms() {
        let f = FamilySpec::JacobiHermite { gamma: q(0) };
        let m1 = f.float_moments(0, 3);
        let m2 = f.float_moments(1, 3);
        let sqpi = std::f64::consts::PI.sqrt();
        assert!((m1[0] - sqpi / 2.0).abs() < 1e-14);
        assert!((m1[1] + 0.5).abs() < 1e-14);
        assert!((m2[0] - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-14);
        assert!((m2[1] - 1.0).abs() < 1e-14);
        assert!((m2[2] - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn validation() {
        assert!(FamilySpec::Charlier { a: vec![q(1), q(1)] }.validate().is_err());
        assert!(FamilySpec::Laguerre1 { alphas: vec![q(0), q(1)] }.validate().is_err());
        assert!(FamilySpec::Laguerre1 { alphas: vec![q(0), qq(1, 2)] }.validate().is_ok());
        assert!(FamilySpec::Krawtchouk { n: 4, ps: vec![q(1)] }.validate().is_err());
        assert!(FamilySpec::AngelescoJacobi { alpha: q(0), beta: q(0), gamma: q(0), a: q(1) }
            .validate()
            .is_err());
    }

    #[test]
    fn shifting_parameters() {
        let k = FamilySpec::Krawtchouk { n: 8, ps: vec![qq(3, 10)] };
        assert_eq!(k.shifted("n", -1).unwrap(), FamilySpec::Krawtchouk { n: 7, ps: vec![qq(3, 10)] });
        assert!(k.shifted("alpha", 1).is_err());
    }
}
