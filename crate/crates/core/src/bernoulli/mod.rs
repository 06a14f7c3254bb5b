//! Entries equal to 1 with probability `c/n` (optionally centered).

pub mod popdyn;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_param, Result};
use crate::limitlaw::{check_alpha, limit_moments, AsymptoticSequence, MomentVector};
use crate::quadrature::CompensatedSum;
use crate::treewords::CountTableSource;

pub use popdyn::{
    default_epsilon, popdyn_resolvent, popdyn_wishart_density, popdyn_wishart_density_curve,
    popdyn_wishart_stieltjes, wishart_from_hermitized, PopdynConfig, PopdynCurve, PopdynResult,
    PopulationPool,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliParams {
    pub alpha: f64,
    pub c: f64,
    /// Subtract the mean `c/n` from every entry.
    pub centered: bool,
}

impl BernoulliParams {
    /// `c = 0` is accepted (the all-zero matrix) but rejected by the limit-law routines.
    pub fn new(alpha: f64, c: f64, centered: bool) -> Result<Self> {
        check_alpha(alpha)?;
        ensure_param(c.is_finite() && c >= 0.0, || {
            format!("c must be non-negative and finite, got {c}")
        })?;
        Ok(Self { alpha, c, centered })
    }

    pub(crate) fn require_positive_c(&self) -> Result<()> {
        ensure_param(self.c > 0.0, || format!("c must be positive, got {}", self.c))
    }
}

fn check_c(c: f64) -> Result<()> {
    ensure_param(c.is_finite() && c > 0.0, || format!("c must be positive, got {c}"))
}

/// `A_k = c^{1 - k/2}` for `2 <= k <= kmax`.
pub fn bernoulli_a(c: f64, kmax: u32) -> Result<AsymptoticSequence> {
    check_c(c)?;
    let values = (2..=kmax.max(2))
        .map(|k| if k == 2 { 1.0 } else { c.powf(1.0 - k as f64 / 2.0) })
        .collect();
    AsymptoticSequence::new(values, c.powf(-0.5).max(1.0))
}

/// Moments of the limit law for the Bernoulli model.
pub fn bernoulli_moments(
    p: &BernoulliParams,
    kmax: u32,
    tables: &dyn CountTableSource,
) -> Result<MomentVector> {
    p.require_positive_c()?;
    limit_moments(&bernoulli_a(p.c, 2 * kmax)?, p.alpha, kmax, tables)
}

/// `c (M_k(c) - M_k(inf)) - a_k^(1)(alpha)`.
///
/// Each tree word with `a` edges contributes `c^{a-k}`, so the residual is
/// the finite sum over classes with `a <= k - 2`; no cancellation occurs.
pub fn expansion_residual(
    p: &BernoulliParams,
    k: u32,
    tables: &dyn CountTableSource,
) -> Result<f64> {
    p.require_positive_c()?;
    let table = tables.count_table(k)?;
    let mut acc = CompensatedSum::default();
    for (key, count) in table.entries() {
        if key.a + 2 <= k {
            let scale = p.c.powi(key.a as i32 + 1 - k as i32);
            acc.add(p.alpha.powi(key.l as i32) * crate::limitlaw::biguint_to_f64(count) * scale);
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitlaw::{mp_moments, perturb_moments};
    use crate::treewords::TableCache;

    #[test]
    fn sequence_values() {
        let a = bernoulli_a(4.0, 4).unwrap();
        assert_eq!(a.get(2), Some(1.0));
        assert_eq!(a.get(3), Some(0.5));
        assert_eq!(a.get(4), Some(0.25));
        assert!(bernoulli_a(0.0, 4).is_err());
    }

    #[test]
    fn second_moment_closed_form() {
        let cache = TableCache::default();
        let p = BernoulliParams::new(2.0, 20.0, false).unwrap();
        let m = bernoulli_moments(&p, 2, &cache).unwrap();
        assert_eq!(m.moments[0], 2.0);
        assert!((m.moments[1] - 6.1).abs() < 1e-14);
    }

    #[test]
    fn large_c_approaches_mp() {
        let cache = TableCache::default();
        let p = BernoulliParams::new(2.0, 1e6, false).unwrap();
        let m = bernoulli_moments(&p, 6, &cache).unwrap();
        let mp = mp_moments(2.0, 6).unwrap();
        let a1 = perturb_moments(2.0, 6).unwrap();
        for k in 1..=6 {
            let d = m.moments[k - 1] - mp.moments[k - 1];
            assert!((d * 1e6 - a1[k - 1]).abs() < 1e-5 * a1[k - 1].max(1.0), "k={k}");
        }
    }

    #[test]
    fn residual_small_orders_vanish() {
        let cache = TableCache::default();
        for c in [0.5, 3.0, 100.0] {
            let p = BernoulliParams::new(2.0, c, false).unwrap();
            assert_eq!(expansion_residual(&p, 1, &cache).unwrap(), 0.0);
            assert_eq!(expansion_residual(&p, 2, &cache).unwrap(), 0.0);
        }
    }

    #[test]
    fn params_validation() {
        assert!(BernoulliParams::new(0.0, 1.0, false).is_err());
        assert!(BernoulliParams::new(1.0, -1.0, false).is_err());
        let zero = BernoulliParams::new(1.0, 0.0, false).unwrap();
        assert!(bernoulli_moments(&zero, 2, &TableCache::default()).is_err());
    }
}
