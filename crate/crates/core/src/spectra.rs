//! Monte Carlo spectra of sampled Wishart matrices.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernoulli::BernoulliParams;
use crate::error::{ensure_param, Error, Result};
use crate::heavytail::{sample_truncated, truncated_moment, HeavyTailParams};
use crate::limitlaw::{mp_edges, MomentVector};
use crate::quadrature::CompensatedSum;
use crate::rng::{stream_rng, RNG_ALGORITHM};

/// Default ceiling on the matrix size.
pub const MAX_N: usize = 4000;

/// Relative tolerance for the positive-semidefinite check.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum MatrixModel {
    Bernoulli(BernoulliParams),
    HeavyTail(HeavyTailParams),
}

impl MatrixModel {
    pub fn alpha(&self) -> f64 {
        match self {
            MatrixModel::Bernoulli(p) => p.alpha,
            MatrixModel::HeavyTail(p) => p.alpha,
        }
    }
}

/// Eigenvalues of one normalised Wishart matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    /// Sorted ascending.
    pub eigenvalues: Vec<f64>,
    pub n: usize,
    pub m: usize,
    #[serde(flatten)]
    pub model: MatrixModel,
    pub seed: u64,
}

/// `round(alpha n)`, required to be at least 1.
pub fn column_count(n: usize, alpha: f64) -> Result<usize> {
    let m = (alpha * n as f64).round();
    ensure_param(m >= 1.0, || format!("alpha * n must round to at least 1 (alpha = {alpha}, n = {n})"))?;
    Ok(m as usize)
}

fn check_n(n: usize) -> Result<()> {
    ensure_param(n >= 2, || format!("n must be at least 2, got {n}"))?;
    ensure_param(n <= MAX_N, || format!("n = {n} exceeds the dense-solver ceiling {MAX_N}"))
}

/// Seed of trial `trial` under the run seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    stream_rng(seed, trial).random()
}

/// `W = A A^T / c` (raw 0/1 entries) or `X X^T / (c (1 - c/n))` with
/// `X = A - c/n` (centered), for `A` an `n x round(alpha n)` Bernoulli(c/n) matrix.
pub fn bernoulli_matrix(n: usize, p: &BernoulliParams, seed: u64) -> Result<Mat<f64>> {
    check_n(n)?;
    let m = column_count(n, p.alpha)?;
    ensure_param(p.c < n as f64, || format!("c = {} must be smaller than n = {n}", p.c))?;
    let mut w = Mat::<f64>::zeros(n, n);
    if p.c == 0.0 {
        return Ok(w);
    }
    let prob = p.c / n as f64;
    let skip = Geometric::new(prob).map_err(|e| Error::InvalidParameter(format!("{e}")))?;
    let mut rng = stream_rng(seed, 0);
    let mut row_sums = vec![0.0f64; n];
    let mut support = Vec::new();
    for _ in 0..m {
        support.clear();
        let mut i = skip.sample(&mut rng);
        while (i as usize) < n {
            support.push(i as usize);
            i += 1 + skip.sample(&mut rng);
        }
        for &r in &support {
            row_sums[r] += 1.0;
            for &s in &support {
                w[(r, s)] += 1.0;
            }
        }
    }
    let scale = if p.centered {
        let mf = m as f64;
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] += prob * prob * mf - prob * (row_sums[i] + row_sums[j]);
            }
        }
        1.0 / (p.c * (1.0 - prob))
    } else {
        1.0 / p.c
    };
    for j in 0..n {
        for i in 0..n {
            w[(i, j)] *= scale;
        }
    }
    Ok(w)
}

/// `W = Y Y^T / (n M_2(P_n))` with i.i.d. entries from the truncated law.
pub fn heavy_matrix(n: usize, p: &HeavyTailParams, seed: u64) -> Result<Mat<f64>> {
    check_n(n)?;
    let m = column_count(n, p.alpha)?;
    let entries = sample_truncated(p, n, n * m, seed)?;
    let y = Mat::<f64>::from_fn(n, m, |i, j| entries[j * n + i]);
    let m2 = truncated_moment(p, n, 2)?;
    let w = &y * y.transpose();
    let scale = 1.0 / (n as f64 * m2);
    Ok(Mat::from_fn(n, n, |i, j| w[(i, j)] * scale))
}

pub fn model_matrix(n: usize, model: &MatrixModel, seed: u64) -> Result<Mat<f64>> {
    match model {
        MatrixModel::Bernoulli(p) => bernoulli_matrix(n, p, seed),
        MatrixModel::HeavyTail(p) => heavy_matrix(n, p, seed),
    }
}

/// All eigenvalues of a symmetric matrix, ascending, after a PSD sanity check.
pub fn psd_eigenvalues(w: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = w.self_adjoint_eigenvalues(Side::Lower).map_err(|e| {
        Error::Numeric(format!(
            "symmetric eigensolver failed on a {}x{} matrix (Frobenius norm {:.6e}): {e:?}",
            w.nrows(),
            w.ncols(),
            w.norm_l2()
        ))
    })?;
    ev.sort_by(f64::total_cmp);
    if let (Some(&lo), Some(&hi)) = (ev.first(), ev.last()) {
        if lo < -PSD_TOL * hi.abs().max(1.0) {
            return Err(Error::Numeric(format!(
                "matrix is not positive semidefinite: smallest eigenvalue {lo:e}, largest {hi:e}"
            )));
        }
    }
    Ok(ev)
}

pub fn sample_wishart(n: usize, model: &MatrixModel, seed: u64) -> Result<SpectralSample> {
    let w = model_matrix(n, model, seed)?;
    Ok(SpectralSample {
        eigenvalues: psd_eigenvalues(&w)?,
        n,
        m: column_count(n, model.alpha())?,
        model: *model,
        seed,
    })
}

pub fn sample_wishart_bernoulli(n: usize, p: &BernoulliParams, seed: u64) -> Result<SpectralSample> {
    sample_wishart(n, &MatrixModel::Bernoulli(*p), seed)
}

pub fn sample_wishart_heavy(n: usize, p: &HeavyTailParams, seed: u64) -> Result<SpectralSample> {
    sample_wishart(n, &MatrixModel::HeavyTail(*p), seed)
}

/// `trials` independent samples; trial `t` uses [`trial_seed`]`(seed, t)`.
pub fn run_trials(
    n: usize,
    model: &MatrixModel,
    trials: usize,
    seed: u64,
) -> Result<Vec<SpectralSample>> {
    ensure_param(trials >= 1, || "at least one trial is required".into())?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| sample_wishart(n, model, trial_seed(seed, t)))
        .collect()
}

/// `M_k = (1/n) sum_i lambda_i^k` for `k = 1..=kmax`.
pub fn empirical_moments(s: &SpectralSample, kmax: usize) -> Result<MomentVector> {
    ensure_param(kmax >= 1, || "kmax must be at least 1".into())?;
    Ok(MomentVector {
        alpha: s.model.alpha(),
        moments: power_means(&s.eigenvalues, kmax),
    })
}

fn power_means(xs: &[f64], kmax: usize) -> Vec<f64> {
    let mut sums = vec![CompensatedSum::default(); kmax];
    for &x in xs {
        let mut p = 1.0;
        for s in sums.iter_mut() {
            p *= x;
            s.add(p);
        }
    }
    let n = xs.len().max(1) as f64;
    sums.iter().map(|s| s.value() / n).collect()
}

/// `(1/n) sum_i 1 / (lambda_i - z)`.
pub fn empirical_stieltjes(s: &SpectralSample, z: Complex64) -> Result<Complex64> {
    EmpiricalMeasure::new(&s.eigenvalues).stieltjes(z)
}

/// Unit-mass density histogram with explicit out-of-range mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub centers: Vec<f64>,
    pub density: Vec<f64>,
    /// Fraction of points below `lo`.
    pub underflow: f64,
    /// Fraction of points at or above `hi`.
    pub overflow: f64,
}

impl Histogram {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.centers.len() as f64
    }

    /// In-range mass plus out-of-range mass.
    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.width() + self.underflow + self.overflow
    }
}

/// Default histogram range `[0, (1 + sqrt(alpha))^2 + 1]`.
pub fn default_range(alpha: f64) -> (f64, f64) {
    (0.0, mp_edges(alpha).1 + 1.0)
}

pub const DEFAULT_BINS: usize = 80;

/// Empirical distribution of a finite point set.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    sorted: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: &[f64]) -> Self {
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    /// Pools the eigenvalues of several samples.
    pub fn pooled(samples: &[SpectralSample]) -> Self {
        let all: Vec<f64> = samples.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
        Self::new(&all)
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of points `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len().max(1) as f64
    }

    /// Kolmogorov distance to another empirical measure.
    pub fn sup_distance(&self, other: &EmpiricalMeasure) -> f64 {
        self.sorted
            .iter()
            .chain(&other.sorted)
            .map(|&x| (self.cdf(x) - other.cdf(x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn moments(&self, kmax: usize) -> Vec<f64> {
        power_means(&self.sorted, kmax)
    }

    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(Error::Domain(format!("Stieltjes transform needs Im z > 0, got {z}")));
        }
        let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
        for &x in &self.sorted {
            let v = 1.0 / (x - z);
            re.add(v.re);
            im.add(v.im);
        }
        let n = self.len().max(1) as f64;
        Ok(Complex64::new(re.value() / n, im.value() / n))
    }

    pub fn histogram(&self, bins: usize, range: (f64, f64)) -> Result<Histogram> {
        let (lo, hi) = range;
        ensure_param(bins >= 1, || "bins must be at least 1".into())?;
        ensure_param(lo < hi && lo.is_finite() && hi.is_finite(), || {
            format!("histogram range [{lo}, {hi}] is empty")
        })?;
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        let (mut under, mut over) = (0usize, 0usize);
        for &x in &self.sorted {
            if x < lo {
                under += 1;
            } else if x >= hi {
                over += 1;
            } else {
                let b = (((x - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
        }
        let total = self.len().max(1) as f64;
        Ok(Histogram {
            lo,
            hi,
            centers: (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect(),
            density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
            underflow: under as f64 / total,
            overflow: over as f64 / total,
        })
    }
}

pub fn histogram(s: &SpectralSample, bins: usize, range: (f64, f64)) -> Result<Histogram> {
    EmpiricalMeasure::new(&s.eigenvalues).histogram(bins, range)
}

/// Variance of `M_k` across trials for each `n`, with the fitted log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecay {
    pub k: usize,
    pub trials: usize,
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of `ln Var` against `ln n`; `None` if any variance is zero.
    pub slope: Option<f64>,
}

pub fn variance_decay_test(
    model: &MatrixModel,
    n_list: &[usize],
    trials: usize,
    k: usize,
    seed: u64,
) -> Result<VarianceDecay> {
    ensure_param(trials >= 30, || format!("need at least 30 trials, got {trials}"))?;
    ensure_param(n_list.len() >= 2, || "need at least two matrix sizes".into())?;
    let mut points = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let samples = run_trials(n, model, trials, trial_seed(seed, i as u64))?;
        let mk: Vec<f64> = samples
            .iter()
            .map(|s| empirical_moments(s, k).map(|m| m.moments[k - 1]))
            .collect::<Result<_>>()?;
        points.push((n, sample_variance(&mk)));
    }
    let slope = if points.iter().all(|&(_, v)| v > 0.0) {
        let xy: Vec<(f64, f64)> = points.iter().map(|&(n, v)| ((n as f64).ln(), v.ln())).collect();
        Some(ls_slope(&xy))
    } else {
        None
    };
    Ok(VarianceDecay { k, trials, points, slope })
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn ls_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Sidecar written next to an eigenvalue dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    #[serde(flatten)]
    pub model: MatrixModel,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub solver: String,
    pub solver_tolerance: f64,
    pub rng: String,
}

/// Path of the JSON sidecar for an eigenvalue dump.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes one eigenvalue per line (`eigenvalue` header) and the JSON sidecar.
pub fn write_sample(s: &SpectralSample, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "eigenvalue")?;
    for x in &s.eigenvalues {
        writeln!(out, "{x:e}")?;
    }
    out.flush()?;
    let meta = SampleMeta {
        model: s.model,
        n: s.n,
        m: s.m,
        seed: s.seed,
        solver: "faer self_adjoint_eigenvalues (dense symmetric)".into(),
        solver_tolerance: PSD_TOL,
        rng: RNG_ALGORITHM.into(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_sample(path: &Path) -> Result<SpectralSample> {
    let meta: SampleMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let text = fs::read_to_string(path)?;
    let eigenvalues = text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| Error::Numeric(format!("bad eigenvalue {l:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    ensure_param(eigenvalues.len() == meta.n, || {
        format!("dump has {} eigenvalues, sidecar says n = {}", eigenvalues.len(), meta.n)
    })?;
    Ok(SpectralSample {
        eigenvalues,
        n: meta.n,
        m: meta.m,
        model: meta.model,
        seed: meta.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(eigenvalues: Vec<f64>) -> SpectralSample {
        SpectralSample {
            n: eigenvalues.len(),
            m: eigenvalues.len(),
            eigenvalues,
            model: MatrixModel::Bernoulli(BernoulliParams::new(1.0, 1.0, false).unwrap()),
            seed: 0,
        }
    }

    #[test]
    fn moments_of_trivial_samples() {
        let m = empirical_moments(&sample(vec![0.0; 5]), 4).unwrap();
        assert_eq!(m.moments, vec![0.0; 4]);
        let m = empirical_moments(&sample(vec![1.0]), 4).unwrap();
        assert_eq!(m.moments, vec![1.0; 4]);
    }

    #[test]
    fn histogram_of_uniform_points() {
        let pts: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let h = EmpiricalMeasure::new(&pts).histogram(10, (0.0, 1.0)).unwrap();
        assert!(h.density.iter().all(|d| (d - 1.0).abs() < 1e-12));
        let h = EmpiricalMeasure::new(&pts).histogram(7, (0.2, 0.9)).unwrap();
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
        assert!((h.underflow - 0.2).abs() < 1e-12);
        assert!(EmpiricalMeasure::new(&pts).histogram(0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn cdf_and_distance() {
        let a = EmpiricalMeasure::new(&[3.0, 1.0, 2.0]);
        assert_eq!(a.cdf(0.0), 0.0);
        assert_eq!(a.cdf(2.0), 2.0 / 3.0);
        assert_eq!(a.cdf(5.0), 1.0);
        assert_eq!(a.sup_distance(&a), 0.0);
        let b = EmpiricalMeasure::new(&[10.0, 11.0, 12.0]);
        assert_eq!(a.sup_distance(&b), 1.0);
    }

    #[test]
    fn stieltjes_basics() {
        let s = sample(vec![0.5, 1.0, 2.0]);
        assert!(empirical_stieltjes(&s, Complex64::new(1.0, 0.0)).is_err());
        let z = Complex64::new(0.0, 1e8);
        let v = empirical_stieltjes(&s, z).unwrap();
        assert!((v * z + 1.0).norm() < 1e-6);
        assert!(empirical_stieltjes(&s, Complex64::new(1.0, 0.1)).unwrap().im > 0.0);
    }

    #[test]
    fn zero_intensity_gives_zero_matrix() {
        let p = BernoulliParams::new(2.0, 0.0, false).unwrap();
        let s = sample_wishart_bernoulli(20, &p, 1).unwrap();
        assert!(s.eigenvalues.iter().all(|&x| x == 0.0));
        assert_eq!(s.m, 40);
    }

    #[test]
    fn parameter_errors() {
        let p = BernoulliParams::new(2.0, 30.0, false).unwrap();
        assert!(sample_wishart_bernoulli(20, &p, 1).is_err());
        let p = BernoulliParams::new(2.0, 3.0, false).unwrap();
        assert!(sample_wishart_bernoulli(1, &p, 1).is_err());
        assert!(sample_wishart_bernoulli(MAX_N + 1, &p, 1).is_err());
        let tiny = BernoulliParams::new(0.01, 1.0, false).unwrap();
        assert!(sample_wishart_bernoulli(10, &tiny, 1).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xy: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0].iter().map(|&x| (x.ln(), (3.0 / x).ln())).collect();
        assert!((ls_slope(&xy) + 1.0).abs() < 1e-12);
        assert_eq!(sample_variance(&[2.0, 2.0, 2.0]), 0.0);
    }
}
