//! Population dynamics for the resolvent of the hermitized adjacency matrix
//! `H = [[0, A], [A^T, 0]]` of a sparse bipartite graph.
//!
//! On the limiting Poisson tree a row vertex has `Poisson(alpha c)` column
//! neighbours and a column vertex has `Poisson(c)` row neighbours. The root
//! resolvent entries satisfy `X = -1 / (z + sum_i X'_i)` where the `X'_i` are
//! i.i.d. copies of the other side's entry. `pool1` holds row-side samples,
//! `pool2` column-side samples, and the Stieltjes transform of the symmetric
//! law `mu'` is `(E X1 + alpha E X2) / (1 + alpha)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BernoulliParams;
use crate::error::{ensure_param, Error, Result};
use crate::quadrature::CompensatedSum;
use crate::rng::stream_rng;

/// Entries per RNG stream. Fixed so results do not depend on the thread count.
pub const CHUNK: usize = 2048;

/// Sweeps inspected by the oscillation diagnostic.
const WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopdynConfig {
    pub pool_size: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Weight of the newest pool mean in the running mixture estimate.
    pub damping: f64,
}

impl Default for PopdynConfig {
    fn default() -> Self {
        Self {
            pool_size: 100_000,
            sweeps: 200,
            seed: 0,
            damping: 0.5,
        }
    }
}

impl PopdynConfig {
    fn validate(&self) -> Result<()> {
        ensure_param(self.pool_size >= 1000, || {
            format!("pool size must be at least 1000, got {}", self.pool_size)
        })?;
        ensure_param(self.sweeps >= 1, || "at least one sweep is required".into())?;
        ensure_param(self.damping > 0.0 && self.damping <= 1.0, || {
            format!("damping must lie in (0, 1], got {}", self.damping)
        })
    }
}

/// Default broadening `epsilon = 0.025 sqrt(c)` in the hermitized variable,
/// about `0.05 sqrt(x)` in the Wishart variable.
pub fn default_epsilon(c: f64) -> f64 {
    0.025 * c.sqrt()
}

/// Row-side and column-side samples of the root resolvent entry at `z`.
#[derive(Clone, Debug)]
pub struct PopulationPool {
    pub pool1: Vec<Complex64>,
    pub pool2: Vec<Complex64>,
    pub z: Complex64,
    pub iterations: usize,
}

/// Pool mean and standard error of the mean (of the complex modulus spread).
fn mean_and_se(pool: &[Complex64]) -> (Complex64, f64) {
    let n = pool.len() as f64;
    let re: CompensatedSum = pool.iter().map(|x| x.re).collect();
    let im: CompensatedSum = pool.iter().map(|x| x.im).collect();
    let mean = Complex64::new(re.value() / n, im.value() / n);
    let var: f64 = pool.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

impl PopulationPool {
    /// Both pools start at `-1/z`, the exact answer for an empty graph.
    pub fn new(z: Complex64, size: usize) -> Self {
        let init = -1.0 / z;
        Self {
            pool1: vec![init; size],
            pool2: vec![init; size],
            z,
            iterations: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.pool1.len()
    }

    /// One synchronous sweep: both pools are rebuilt from the previous ones.
    pub fn sweep(&mut self, p: &BernoulliParams, seed: u64) -> Result<()> {
        let rows = Poisson::new(p.alpha * p.c)
            .map_err(|e| Error::InvalidParameter(format!("row degree law: {e}")))?;
        let cols = Poisson::new(p.c)
            .map_err(|e| Error::InvalidParameter(format!("column degree law: {e}")))?;
        let chunks = self.size().div_ceil(CHUNK) as u64;
        let base = 2 * chunks * self.iterations as u64;
        let new1 = resample(&self.pool2, self.size(), self.z, &rows, seed, base);
        let new2 = resample(&self.pool1, self.size(), self.z, &cols, seed, base + chunks);
        self.pool1 = new1;
        self.pool2 = new2;
        self.iterations += 1;
        if self.pool1.iter().chain(&self.pool2).any(|x| !(x.im > 0.0)) {
            return Err(Error::Numeric(format!(
                "population left the upper half-plane at sweep {} (z = {})",
                self.iterations, self.z
            )));
        }
        Ok(())
    }

    /// Mixture mean and its standard error.
    pub fn mixture(&self, alpha: f64) -> (Complex64, f64) {
        let (m1, s1) = mean_and_se(&self.pool1);
        let (m2, s2) = mean_and_se(&self.pool2);
        let w1 = 1.0 / (1.0 + alpha);
        let w2 = alpha / (1.0 + alpha);
        (m1 * w1 + m2 * w2, (w1 * w1 * s1 * s1 + w2 * w2 * s2 * s2).sqrt())
    }
}

fn resample(
    from: &[Complex64],
    size: usize,
    z: Complex64,
    degree: &Poisson<f64>,
    seed: u64,
    stream_base: u64,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); size];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        let mut rng = stream_rng(seed, stream_base + ci as u64);
        for slot in chunk.iter_mut() {
            let n = degree.sample(&mut rng) as usize;
            let mut s = z;
            for _ in 0..n {
                s += from[rng.random_range(0..from.len())];
            }
            *slot = -1.0 / s;
        }
    });
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopdynResult {
    pub z: [f64; 2],
    /// Damped mixture estimate of the Stieltjes transform of `mu'`.
    pub m: Complex64,
    /// Standard error of the last pool mixture mean.
    pub stderr: f64,
    pub sweeps: usize,
    pub pool_size: usize,
    pub seed: u64,
    /// Largest distance of a recent raw pool mean from their average.
    pub oscillation: f64,
    pub converged: bool,
    pub warning: Option<String>,
}

/// Runs the pools to the fixed point and returns them with the summary.
pub fn run_population(
    p: &BernoulliParams,
    z: Complex64,
    config: &PopdynConfig,
) -> Result<(PopulationPool, PopdynResult)> {
    p.require_positive_c()?;
    config.validate()?;
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("population dynamics needs Im z > 0, got {z}")));
    }
    let mut pool = PopulationPool::new(z, config.pool_size);
    let mut estimate = -1.0 / z;
    let mut recent = Vec::with_capacity(config.sweeps);
    let mut stderr = 0.0;
    for _ in 0..config.sweeps {
        pool.sweep(p, config.seed)?;
        let (raw, se) = pool.mixture(p.alpha);
        estimate = estimate * (1.0 - config.damping) + raw * config.damping;
        recent.push(raw);
        stderr = se;
    }
    let window = &recent[recent.len().saturating_sub(WINDOW)..];
    let avg = window.iter().sum::<Complex64>() / window.len() as f64;
    let oscillation = window.iter().map(|r| (r - avg).norm()).fold(0.0, f64::max);
    // Successive pools are correlated, so the raw mean jitters by a few
    // standard errors even at the fixed point.
    let converged = oscillation <= 8.0 * stderr.max(1e-12);
    let warning = (!converged).then(|| {
        format!(
            "pool mean still oscillates by {oscillation:.3e} (standard error {stderr:.3e}) after {} sweeps",
            config.sweeps
        )
    });
    let result = PopdynResult {
        z: [z.re, z.im],
        m: estimate,
        stderr,
        sweeps: config.sweeps,
        pool_size: config.pool_size,
        seed: config.seed,
        oscillation,
        converged,
        warning,
    };
    Ok((pool, result))
}

/// Stieltjes transform of the symmetric law `mu'_c` at `z`.
pub fn popdyn_resolvent(
    p: &BernoulliParams,
    z: Complex64,
    config: &PopdynConfig,
) -> Result<PopdynResult> {
    Ok(run_population(p, z, config)?.1)
}

/// `m_W(z)` for `W = A A^T / c` from `m_H(zeta)`, `zeta = sqrt(c z)`:
/// `m_W(z) = c ((1 + alpha) m_H(zeta) + (alpha - 1) / zeta) / (2 zeta)`.
pub fn wishart_from_hermitized(alpha: f64, c: f64, zeta: Complex64, m_h: Complex64) -> Complex64 {
    c * ((1.0 + alpha) * m_h + (alpha - 1.0) / zeta) / (2.0 * zeta)
}

/// Stieltjes transform of the Wishart limit law at `z` and its standard error.
pub fn popdyn_wishart_stieltjes(
    p: &BernoulliParams,
    z: Complex64,
    config: &PopdynConfig,
) -> Result<(Complex64, PopdynResult)> {
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("Stieltjes transform needs Im z > 0, got {z}")));
    }
    let zeta = (p.c * z).sqrt();
    let r = popdyn_resolvent(p, zeta, config)?;
    let m = wishart_from_hermitized(p.alpha, p.c, zeta, r.m);
    Ok((m, r))
}

/// Reconstructed density curve of the Wishart limit law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopdynCurve {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Broadening in the hermitized variable.
    pub epsilon: f64,
    /// Estimated atom of `mu'` at zero.
    pub atom_hermitized: f64,
    /// Implied atom of the Wishart law at zero.
    pub atom: f64,
    pub runs: Vec<PopdynResult>,
}

impl PopdynCurve {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.converged)
    }
}

/// Density at each `x > 0` from `g(t) = Im m_{mu'}(t + i epsilon) / pi`:
/// `rho(x) = ((1 + alpha)/2) g_c(sqrt(c x)) sqrt(c / x)`, where `g_c` is `g`
/// with the Lorentzian of the atom at zero removed.
pub fn popdyn_wishart_density_curve(
    p: &BernoulliParams,
    xs: &[f64],
    epsilon: Option<f64>,
    config: &PopdynConfig,
) -> Result<PopdynCurve> {
    p.require_positive_c()?;
    if let Some(&x) = xs.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(format!("density reconstruction needs x > 0, got {x}")));
    }
    let eps = epsilon.unwrap_or_else(|| default_epsilon(p.c));
    ensure_param(eps > 0.0 && eps.is_finite(), || format!("epsilon must be positive, got {eps}"))?;

    let at_zero = popdyn_resolvent(p, Complex64::new(0.0, eps), config)?;
    let atom_h = eps * at_zero.m.im;
    let atom = 0.5 * ((1.0 + p.alpha) * atom_h - (p.alpha - 1.0));

    let scale = 0.5 * (1.0 + p.alpha);
    let mut density = Vec::with_capacity(xs.len());
    let mut stderr = Vec::with_capacity(xs.len());
    let mut runs = vec![at_zero];
    for &x in xs {
        let t = (p.c * x).sqrt();
        let r = popdyn_resolvent(p, Complex64::new(t, eps), config)?;
        let lorentz = atom_h * eps / (PI * (t * t + eps * eps));
        let g = r.m.im / PI - lorentz;
        let jac = scale * (p.c / x).sqrt();
        density.push(g * jac);
        stderr.push(r.stderr / PI * jac);
        runs.push(r);
    }
    Ok(PopdynCurve {
        x: xs.to_vec(),
        density,
        stderr,
        epsilon: eps,
        atom_hermitized: atom_h,
        atom,
        runs,
    })
}

/// Single-point version of [`popdyn_wishart_density_curve`]: `(density, stderr)`.
pub fn popdyn_wishart_density(
    p: &BernoulliParams,
    x: f64,
    epsilon: Option<f64>,
    config: &PopdynConfig,
) -> Result<(f64, f64)> {
    let curve = popdyn_wishart_density_curve(p, &[x], epsilon, config)?;
    Ok((curve.density[0], curve.stderr[0]))
}
