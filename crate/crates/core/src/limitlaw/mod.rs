//! Limiting moments from count tables, the Marchenko-Pastur law and its
//! first-order correction.

pub mod density;
pub mod series;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_param, Error, Result};
use crate::quadrature::CompensatedSum;
use crate::treewords::CountTableSource;

pub use density::{
    continuous_moments, mp_atom, mp_density, mp_edges, mp_stieltjes, mp_stieltjes_continued,
    perturb_density, perturb_stieltjes, perturb_stieltjes_continued, signed_quadrature,
    sqrt_discriminant, DensityModel, FirstOrder, MarchenkoPastur, Perturbation,
};
pub use series::{mp_series, perturb_series, MpSeries, PerturbSeries};

/// The numbers `A_k` describing how entry moments scale, with growth constant
/// `gamma` (`|A_k| <= C gamma^k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSequence {
    /// `values[i]` is `A_{i + 2}`.
    values: Vec<f64>,
    gamma: f64,
}

impl AsymptoticSequence {
    /// `values` starts at `A_2`, which must be exactly 1.
    pub fn new(values: Vec<f64>, gamma: f64) -> Result<Self> {
        ensure_param(values.first() == Some(&1.0), || {
            format!("A_2 must equal 1, got {:?}", values.first())
        })?;
        ensure_param(values.iter().all(|v| v.is_finite()), || {
            "asymptotic sequence has non-finite values".into()
        })?;
        ensure_param(gamma.is_finite() && gamma >= 0.0, || {
            format!("growth constant must be finite and non-negative, got {gamma}")
        })?;
        Ok(Self { values, gamma })
    }

    /// `A_2 = 1`, `A_k = 0` for `k > 2`: the Gaussian-like case.
    pub fn marchenko_pastur(kmax: u32) -> Self {
        let mut values = vec![0.0; kmax.max(2) as usize - 1];
        values[0] = 1.0;
        Self { values, gamma: 0.0 }
    }

    /// `A_k`, or `None` outside `2..=kmax`.
    pub fn get(&self, k: u32) -> Option<f64> {
        k.checked_sub(2).and_then(|i| self.values.get(i as usize)).copied()
    }

    /// Largest index available.
    pub fn kmax(&self) -> u32 {
        self.values.len() as u32 + 1
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(k, A_k)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i as u32 + 2, v))
    }
}

/// Moments `M_1, ..., M_kmax` of a law on the half-line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub alpha: f64,
    /// `moments[k - 1]` is `M_k`.
    pub moments: Vec<f64>,
}

impl MomentVector {
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.moments.get(i)).copied()
    }

    pub fn kmax(&self) -> usize {
        self.moments.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    ensure_param(alpha.is_finite() && alpha > 0.0, || {
        format!("alpha must be positive and finite, got {alpha}")
    })
}

/// `M_k = sum over tree-word classes of alpha^l |W_k(a, a+1, l, b)| prod_i A_{b_i}`.
pub fn limit_moments(
    seq: &AsymptoticSequence,
    alpha: f64,
    kmax: u32,
    tables: &dyn CountTableSource,
) -> Result<MomentVector> {
    check_alpha(alpha)?;
    if kmax > tables.guard() {
        return Err(Error::ResourceLimit {
            k: kmax,
            guard: tables.guard(),
        });
    }
    if seq.kmax() < 2 * kmax {
        return Err(Error::InvalidParameter(format!(
            "asymptotic sequence must reach A_{} (has up to A_{})",
            2 * kmax,
            seq.kmax()
        )));
    }
    let mut moments = Vec::with_capacity(kmax as usize);
    for k in 1..=kmax {
        let table = tables.count_table(k)?;
        let mut acc = CompensatedSum::default();
        for (key, count) in table.entries() {
            let weight: f64 = key
                .b
                .iter()
                .map(|&m| seq.get(m).expect("sequence length checked"))
                .product();
            if weight == 0.0 {
                continue;
            }
            acc.add(alpha.powi(key.l as i32) * biguint_to_f64(count) * weight);
        }
        moments.push(acc.value());
    }
    Ok(MomentVector { alpha, moments })
}

pub(crate) fn biguint_to_f64(x: &num_bigint::BigUint) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY)
}

/// Marchenko-Pastur moments from the generating series (no enumeration).
pub fn mp_moments(alpha: f64, kmax: u32) -> Result<MomentVector> {
    check_alpha(alpha)?;
    let s = mp_series(kmax as usize);
    Ok(MomentVector {
        alpha,
        moments: s.a[1..].iter().map(|p| p.eval(alpha)).collect(),
    })
}

/// Moments `a_k^(1)(alpha)`, `k = 1..=kmax`, of the correction measure.
pub fn perturb_moments(alpha: f64, kmax: u32) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let s = perturb_series(kmax as usize);
    Ok(s.a1[1..].iter().map(|p| p.eval(alpha)).collect())
}

/// Smallest `C` with `M_k <= k^(C k)` for `2 <= k <= kmax`, i.e. the largest
/// `ln M_k / (k ln k)`. Non-positive moments are skipped.
pub fn carleman_exponent(m: &MomentVector) -> f64 {
    m.moments
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| {
            let k = (i + 1) as f64;
            v.ln() / (k * k.ln())
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treewords::TableCache;

    #[test]
    fn sequence_validation() {
        assert!(AsymptoticSequence::new(vec![1.0, 0.5], 1.0).is_ok());
        assert!(AsymptoticSequence::new(vec![0.9, 0.5], 1.0).is_err());
        assert!(AsymptoticSequence::new(vec![], 1.0).is_err());
        assert!(AsymptoticSequence::new(vec![1.0, f64::NAN], 1.0).is_err());
        let mp = AsymptoticSequence::marchenko_pastur(6);
        assert_eq!(mp.get(2), Some(1.0));
        assert_eq!(mp.get(6), Some(0.0));
        assert_eq!(mp.get(7), None);
        assert_eq!(mp.get(1), None);
    }

    #[test]
    fn mp_moment_examples() {
        let m = mp_moments(2.0, 3).unwrap();
        assert_eq!(m.moments, vec![2.0, 6.0, 22.0]);
        let m = mp_moments(1.0, 3).unwrap();
        assert_eq!(m.moments, vec![1.0, 2.0, 5.0]);
        assert!(mp_moments(0.0, 3).is_err());
    }

    #[test]
    fn enumeration_matches_series() {
        let cache = TableCache::default();
        for alpha in [1.0, 2.0, 4.0] {
            let seq = AsymptoticSequence::marchenko_pastur(16);
            let m = limit_moments(&seq, alpha, 8, &cache).unwrap();
            let oracle = mp_moments(alpha, 8).unwrap();
            assert_eq!(m.moments, oracle.moments, "alpha={alpha}");
        }
    }

    #[test]
    fn first_moment_is_alpha() {
        let seq = AsymptoticSequence::new(vec![1.0, 0.3], 1.0).unwrap();
        let m = limit_moments(&seq, 3.5, 1, &TableCache::default()).unwrap();
        assert_eq!(m.moments, vec![3.5]);
    }

    #[test]
    fn limit_moment_errors() {
        let cache = TableCache::in_memory(4);
        let seq = AsymptoticSequence::marchenko_pastur(20);
        assert!(matches!(
            limit_moments(&seq, 1.0, 5, &cache),
            Err(Error::ResourceLimit { k: 5, guard: 4 })
        ));
        let short = AsymptoticSequence::marchenko_pastur(5);
        assert!(matches!(
            limit_moments(&short, 1.0, 3, &cache),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn carleman_growth() {
        let m = mp_moments(2.0, 10).unwrap();
        let c = carleman_exponent(&m);
        assert!(c.is_finite() && c > 0.0);
        for (i, &v) in m.moments.iter().enumerate().skip(1) {
            let k = (i + 1) as f64;
            assert!(v <= k.powf(c * k) * (1.0 + 1e-12));
        }
    }
}
