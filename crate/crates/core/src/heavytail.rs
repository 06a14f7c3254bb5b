//! Entries with density `C(beta) / (1 + |x|^beta)`, `1 < beta < 3`, truncated
//! at `T = B n^{1/(beta-1)}`.
//!
//! The truncated law `P_n` keeps the density on `[-T, T]` and moves the tail
//! mass beyond each cutoff onto an atom at that cutoff, so each atom carries
//! `C int_T^inf dx / (1 + x^beta)`.
//!
//! Asymptotically `M_k(P_n) ~ 2C T^{k+1-beta} D_k` for even `k` with
//! `D_k = 1/(k+1-beta) + 1/(beta-1) = k / ((k+1-beta)(beta-1))`, which gives
//! `A_k = (2C)^{1-k/2} D_k / D_2^{k/2} B^{(beta-1)(k/2-1)}`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_param, Error, Result};
use crate::limitlaw::{check_alpha, perturb_moments, AsymptoticSequence, MomentVector};
use crate::quadrature::{adaptive_integrate, CompensatedSum};
use crate::rng::stream_rng;
use crate::treewords::CountTableSource;

const REL_TOL: f64 = 1e-12;

/// Draws per RNG stream in [`sample_truncated`].
pub const SAMPLE_CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailParams {
    pub beta: f64,
    /// Truncation scale in units of `n^{1/(beta-1)}`.
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
}

impl HeavyTailParams {
    pub fn new(beta: f64, b: f64, alpha: f64) -> Result<Self> {
        ensure_param(beta > 1.0 && beta < 3.0, || format!("beta must lie in (1, 3), got {beta}"))?;
        ensure_param(b.is_finite() && b > 0.0, || format!("B must be positive, got {b}"))?;
        check_alpha(alpha)?;
        Ok(Self { beta, b, alpha })
    }

    /// Cutoff `B n^{1/(beta-1)}`.
    pub fn cutoff(&self, n: usize) -> f64 {
        self.b * (n as f64).powf(1.0 / (self.beta - 1.0))
    }
}

/// `int_T^inf dx / (1 + x^beta)` for `T >= 1`, via `u = x^{1-beta}`.
fn upper_tail(beta: f64, t: f64) -> Result<f64> {
    let p = beta / (beta - 1.0);
    let hi = t.powf(1.0 - beta);
    let v = adaptive_integrate(|u| 1.0 / (1.0 + u.powf(p)), 0.0, hi, 0.0, REL_TOL)?;
    Ok(v / (beta - 1.0))
}

/// `C(beta) = (int_R dx / (1 + |x|^beta))^{-1}`.
pub fn c_beta(beta: f64) -> Result<f64> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::NonIntegrable(beta));
    }
    let core = adaptive_integrate(|x| 1.0 / (1.0 + x.powf(beta)), 0.0, 1.0, 0.0, REL_TOL)?;
    Ok(0.5 / (core + upper_tail(beta, 1.0)?))
}

fn d_k(beta: f64, k: u32) -> Result<f64> {
    let gap = k as f64 + 1.0 - beta;
    if gap.abs() < 1e-12 {
        return Err(Error::Pole { k });
    }
    Ok(k as f64 / (gap * (beta - 1.0)))
}

/// `A_k` for `2 <= k <= kmax`. Odd indices vanish by symmetry.
pub fn heavy_a(p: &HeavyTailParams, kmax: u32) -> Result<AsymptoticSequence> {
    let c = c_beta(p.beta)?;
    let d2 = d_k(p.beta, 2)?;
    let mut values = Vec::with_capacity(kmax.max(2) as usize - 1);
    for k in 2..=kmax.max(2) {
        let v = if k == 2 {
            1.0
        } else if k % 2 == 1 {
            0.0
        } else {
            let h = k as f64 / 2.0;
            (2.0 * c).powf(1.0 - h) * d_k(p.beta, k)? / d2.powf(h)
                * p.b.powf((p.beta - 1.0) * (h - 1.0))
        };
        values.push(v);
    }
    // A_{2j} grows like (const)^j times B-powers, so gamma^2 bounds the ratio.
    let gamma = values
        .iter()
        .enumerate()
        .skip(2)
        .step_by(2)
        .map(|(i, v)| v.abs().powf(1.0 / (i + 2) as f64))
        .fold(1.0, f64::max);
    AsymptoticSequence::new(values, gamma)
}

/// Limit moments for the truncated heavy-tail model.
pub fn heavy_moments(
    p: &HeavyTailParams,
    kmax: u32,
    tables: &dyn CountTableSource,
) -> Result<MomentVector> {
    crate::limitlaw::limit_moments(&heavy_a(p, 2 * kmax)?, p.alpha, kmax, tables)
}

/// Small-`B` comparison of `M_k(mu_{alpha,beta,B}) - M_k(mu_alpha)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub beta: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
    pub k: u32,
    pub lhs: f64,
    /// `B^{beta-1} / (2C) * (3-beta)^2 / ((2-beta)(5-beta)) * a_k^(1)`; absent at `beta = 2`.
    pub rhs_theorem: Option<f64>,
    /// `A_4 a_k^(1)`.
    #[serde(rename = "rhs_A4")]
    pub rhs_a4: f64,
    /// `lhs / rhs_theorem`.
    pub ratio: Option<f64>,
    pub warning: Option<String>,
}

/// Coefficient of `B^{beta-1} a_k^(1)` implied by `A_4`:
/// `(3-beta)^2 (beta-1) / (2C (5-beta))`.
pub fn a4_coefficient(beta: f64) -> Result<f64> {
    Ok((3.0 - beta).powi(2) * (beta - 1.0) / (2.0 * c_beta(beta)? * (5.0 - beta)))
}

/// Coefficient printed with the small-`B` expansion:
/// `(3-beta)^2 / (2C (2-beta)(5-beta))`, or `None` at the pole `beta = 2`.
pub fn theorem_coefficient(beta: f64) -> Result<Option<f64>> {
    if (beta - 2.0).abs() < 1e-12 {
        return Ok(None);
    }
    Ok(Some(
        (3.0 - beta).powi(2) / (2.0 * c_beta(beta)? * (2.0 - beta) * (5.0 - beta)),
    ))
}

/// `lhs` is summed over the classes with some multiplicity above 2, so it
/// is free of cancellation.
pub fn expansion_check(
    p: &HeavyTailParams,
    k: u32,
    tables: &dyn CountTableSource,
) -> Result<ExpansionCheck> {
    let seq = heavy_a(p, (2 * k).max(4))?;
    let table = tables.count_table(k)?;
    let mut lhs = CompensatedSum::default();
    for (key, count) in table.entries() {
        if key.all_twos() {
            continue;
        }
        let w: f64 = key.b.iter().map(|&m| seq.get(m).expect("sequence covers 2k")).product();
        lhs.add(p.alpha.powi(key.l as i32) * crate::limitlaw::biguint_to_f64(count) * w);
    }
    let lhs = lhs.value();
    let a1 = perturb_moments(p.alpha, k)?[k as usize - 1];
    let a4 = seq.get(4).expect("k >= 2 reaches A_4");
    let rhs_a4 = a4 * a1;
    let rhs_theorem = theorem_coefficient(p.beta)?.map(|c| p.b.powf(p.beta - 1.0) * c * a1);
    let ratio = rhs_theorem.filter(|r| *r != 0.0).map(|r| lhs / r);
    let warning = rhs_theorem.is_none().then(|| {
        "the printed coefficient has a pole at beta = 2; only rhs_A4 is reported".to_string()
    });
    Ok(ExpansionCheck {
        beta: p.beta,
        b: p.b,
        alpha: p.alpha,
        k,
        lhs,
        rhs_theorem,
        rhs_a4,
        ratio,
        warning,
    })
}

/// Mass of each boundary atom of `P_n`.
pub fn atom_mass(p: &HeavyTailParams, n: usize) -> Result<f64> {
    let t = p.cutoff(n);
    let c = c_beta(p.beta)?;
    if t >= 1.0 {
        Ok(c * upper_tail(p.beta, t)?)
    } else {
        let inner = adaptive_integrate(|x| 1.0 / (1.0 + x.powf(p.beta)), t, 1.0, 0.0, REL_TOL)?;
        Ok(c * (inner + upper_tail(p.beta, 1.0)?))
    }
}

/// `M_k(P_n) = 2C int_0^T x^k / (1 + x^beta) dx + 2 atom T^k` (zero for odd `k`).
pub fn truncated_moment(p: &HeavyTailParams, n: usize, k: u32) -> Result<f64> {
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let beta = p.beta;
    let t = p.cutoff(n);
    let c = c_beta(beta)?;
    let kf = k as f64;
    let f = |x: f64| x.powf(kf) / (1.0 + x.powf(beta));
    let body = if t <= 1.0 {
        adaptive_integrate(f, 0.0, t, 0.0, REL_TOL)?
    } else {
        let core = adaptive_integrate(f, 0.0, 1.0, 0.0, REL_TOL)?;
        // x = e^s on [1, T].
        let outer = adaptive_integrate(
            |s| (s * (kf + 1.0)).exp() / (1.0 + (s * beta).exp()),
            0.0,
            t.ln(),
            0.0,
            REL_TOL,
        )?;
        core + outer
    };
    Ok(2.0 * c * body + 2.0 * atom_mass(p, n)? * t.powf(kf))
}

/// `M_k(P_n) / (n^{k/2-1} M_2(P_n)^{k/2})`, the finite-`n` version of `A_k`.
pub fn finite_n_a(p: &HeavyTailParams, n: usize, k: u32) -> Result<f64> {
    let mk = truncated_moment(p, n, k)?;
    let m2 = truncated_moment(p, n, 2)?;
    let h = k as f64 / 2.0;
    Ok(mk / ((n as f64).powf(h - 1.0) * m2.powf(h)))
}

/// One draw from the untruncated law: rejection from the envelope
/// `min(1, |x|^{-beta})`, accepted with probability at least 1/2.
fn draw_untruncated<R: Rng>(rng: &mut R, beta: f64) -> f64 {
    let w0 = (beta - 1.0) / beta;
    loop {
        let x = if rng.random::<f64>() < w0 {
            rng.random::<f64>()
        } else {
            // Pareto on [1, inf) with density (beta-1) x^{-beta}.
            (1.0 - rng.random::<f64>()).powf(-1.0 / (beta - 1.0))
        };
        let envelope = if x <= 1.0 { 1.0 } else { x.powf(-beta) };
        if rng.random::<f64>() * envelope * (1.0 + x.powf(beta)) <= 1.0 {
            return if rng.random::<bool>() { x } else { -x };
        }
    }
}

/// `count` independent draws from `P_n`: clipping an exact draw of the
/// untruncated law to `[-T, T]` reproduces the boundary atoms exactly.
pub fn sample_truncated(p: &HeavyTailParams, n: usize, count: usize, seed: u64) -> Result<Vec<f64>> {
    ensure_param(n >= 1, || "n must be at least 1".into())?;
    ensure_param(count >= 1, || "count must be at least 1".into())?;
    let t = p.cutoff(n);
    let mut out = vec![0.0; count];
    out.par_chunks_mut(SAMPLE_CHUNK).enumerate().for_each(|(ci, chunk)| {
        let mut rng = stream_rng(seed, ci as u64);
        for slot in chunk.iter_mut() {
            *slot = draw_untruncated(&mut rng, p.beta).clamp(-t, t);
        }
    });
    Ok(out)
}
