//! Tolerances shared by every float comparison in the crate.
//!
//! `eps_rel` is the single user-facing knob; it defaults to `1e-10` and can
//! be overridden through the `MOPCHR_EPS` environment variable (read by the
//! CLI) or [`set_eps_rel`].

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_EPS_REL: f64 = 1e-10;
/// Relative size of a vanishing `δ` that counts as a breakdown.
pub const EPS_BREAKDOWN: f64 = 1e-12;
/// Pivot threshold (relative to the largest matrix entry) below which a float solve is singular.
pub const PIVOT_TOL: f64 = 1e-14;
/// Pivot ratio below which a float determinant is flagged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e-8;
/// Interlacing margin relative to the local root gap.
pub const INTERLACE_MARGIN: f64 = 1e-9;
/// Root separation below which two float roots are merged into a cluster.
pub const ROOT_CLUSTER: f64 = 1e-8;
/// Exact bisection refinement is used up to this degree.
pub const BISECT_MAX_DEGREE: usize = 12;

pub const ENV_EPS: &str = "MOPCHR_EPS";

static EPS_BITS: AtomicU64 = AtomicU64::new(0x3DDB7CDFD9D7BDBB); // 1e-10

pub fn eps_rel() -> f64 {
    f64::from_bits(EPS_BITS.load(Ordering::Relaxed))
}

pub fn set_eps_rel(eps: f64) {
    assert!(eps.is_finite() && eps > 0.0, "eps_rel must be positive");
    EPS_BITS.store(eps.to_bits(), Ordering::Relaxed);
}

/// Applies `MOPCHR_EPS` if set; returns the parse error otherwise.
pub fn eps_from_env() -> Result<Option<f64>, String> {
    match std::env::var(ENV_EPS) {
        Ok(v) => {
            let eps: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("{ENV_EPS}='{v}' is not a number"))?;
            if !(eps.is_finite() && eps > 0.0) {
                return Err(format!("{ENV_EPS} must be positive"));
            }
            set_eps_rel(eps);
            Ok(Some(eps))
        }
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn default_bits() {
        assert_eq!(f64::from_bits(0x3DDB7CDFD9D7BDBB), super::DEFAULT_EPS_REL);
    }
}
