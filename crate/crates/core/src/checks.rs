//! Self-check suites shared by the `check` command and the acceptance tests.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bernoulli::{
    bernoulli_moments, expansion_residual, popdyn_wishart_stieltjes, BernoulliParams, PopdynConfig,
};
use crate::heavytail::{expansion_check, finite_n_a, heavy_a, HeavyTailParams};
use crate::limitlaw::{
    continuous_moments, mp_edges, mp_series, mp_stieltjes, perturb_density, perturb_moments,
    perturb_series, perturb_stieltjes, MarchenkoPastur, Perturbation,
};
use crate::quadrature::GaussLegendre;
use crate::rng::stream_rng;
use crate::spectra::{
    empirical_moments, empirical_stieltjes, run_trials, sample_variance, sample_wishart_bernoulli,
    variance_decay_test, EmpiricalMeasure, MatrixModel, DEFAULT_BINS,
};
use crate::treewords::{count_table, CountTableSource};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Informational line; never fails the suite.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            lines: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        });
    }

    fn report(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            name: name.into(),
            status: Status::Report,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| l.status == Status::Fail)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            let tag = match l.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Report => "INFO",
            };
            writeln!(f, "{tag} [{}] {}: {}", self.suite, l.name, l.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oracles,
    Expansion,
    Variance,
    Popdyn,
    Montecarlo,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Oracles,
        Suite::Expansion,
        Suite::Variance,
        Suite::Popdyn,
        Suite::Montecarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracles => "oracles",
            Suite::Expansion => "expansion",
            Suite::Variance => "variance",
            Suite::Popdyn => "popdyn",
            Suite::Montecarlo => "montecarlo",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Scale knobs for the randomised suites. `None` picks the full-size default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub seed: u64,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub pool_size: Option<usize>,
    pub sweeps: Option<usize>,
}

pub fn run_suite(suite: Suite, opts: &CheckOptions, tables: &dyn CountTableSource) -> Result<CheckReport> {
    match suite {
        Suite::Oracles => oracles(opts.seed, tables),
        Suite::Expansion => expansion(tables),
        Suite::Variance => variance(opts),
        Suite::Popdyn => popdyn(opts),
        Suite::Montecarlo => montecarlo(opts, tables),
    }
}

/// Word enumeration against the generating series, quadrature identities,
/// Stieltjes consistency and the exact Bernoulli identities.
pub fn oracles(seed: u64, tables: &dyn CountTableSource) -> Result<CheckReport> {
    let mut r = CheckReport::new("oracles");
    let kmax = 8u32.min(tables.guard());
    let mp = mp_series(kmax as usize);
    let pert = perturb_series(kmax as usize);
    let mut contour_ok = true;
    let mut quad_ok = true;
    for k in 1..=kmax {
        let t = count_table(k, tables.guard())?;
        contour_ok &= t.alpha_polynomial(|key| key.all_twos()) == mp.a[k as usize];
        if k >= 2 {
            quad_ok &= t.alpha_polynomial(|key| key.one_quadruple()) == pert.a1[k as usize];
        }
    }
    r.push("contour words vs A series", contour_ok, format!("k = 1..{kmax}, exact"));
    r.push("quadruple words vs A1 series", quad_ok, format!("k = 2..{kmax}, exact"));

    for alpha in [1.0, 2.0, 4.0] {
        let q = continuous_moments(&Perturbation::new(alpha)?, 6)?;
        let a1 = perturb_moments(alpha, 6)?;
        let err = (1..=6).map(|k| (q[k] - a1[k - 1]).abs()).fold(0.0, f64::max);
        r.push(
            format!("correction mass, alpha = {alpha}"),
            q[0].abs() < 1e-10,
            format!("{:.3e}", q[0]),
        );
        r.push(
            format!("correction moments k <= 6, alpha = {alpha}"),
            err < 1e-8,
            format!("max error {err:.3e}"),
        );
    }
    for alpha in [0.5, 1.0, 2.0, 4.0] {
        let q = continuous_moments(&MarchenkoPastur::new(alpha)?, 1)?;
        let (e0, e1) = ((q[0] - alpha.min(1.0)).abs(), (q[1] - alpha).abs());
        r.push(
            format!("MP continuous mass and mean, alpha = {alpha}"),
            e0 < 1e-10 && e1 < 1e-9,
            format!("mass error {e0:.3e}, mean error {e1:.3e}"),
        );
    }

    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let z = Complex64::new(rng.random_range(-2.0..10.0), rng.random_range(1e-3..4.0));
        let s = mp_stieltjes(z, 2.0)?;
        worst = worst.max((z * s * s - (2.0 - z - 1.0) * s + 1.0).norm());
    }
    r.push("MP Stieltjes quadratic residual", worst < 1e-12, format!("max {worst:.3e} at 20 points"));
    let (a, b) = mp_edges(2.0);
    let mut inv: f64 = 0.0;
    for i in 0..10 {
        let x = a + (b - a) * (i as f64 + 0.5) / 10.0;
        let s = perturb_stieltjes(Complex64::new(x, 1e-6), 2.0)?;
        inv = inv.max((s.im / std::f64::consts::PI - perturb_density(x, 2.0)).abs());
    }
    r.push("correction density from Stieltjes inversion", inv < 1e-4, format!("max gap {inv:.3e}"));

    let mut m2_err: f64 = 0.0;
    for (alpha, c) in [(0.5, 1.0), (1.0, 3.0), (2.0, 20.0), (4.0, 0.7), (3.3, 1e3)] {
        let m = bernoulli_moments(&BernoulliParams::new(alpha, c, false)?, 2, tables)?;
        let exact = alpha * alpha + alpha + alpha / c;
        m2_err = m2_err.max((m.moments[1] - exact).abs() / exact);
    }
    r.push("Bernoulli M2 closed form", m2_err < 1e-14, format!("max relative error {m2_err:.3e}"));
    for k in [4, 6].into_iter().filter(|&k| k <= tables.guard()) {
        let res = |c: f64| expansion_residual(&BernoulliParams::new(2.0, c, false)?, k, tables);
        let ratio = res(100.0)? / res(1000.0)?;
        r.push(
            format!("1/c expansion rate, k = {k}"),
            (5.0..=20.0).contains(&ratio),
            format!("residual(100)/residual(1000) = {ratio:.4}"),
        );
    }
    Ok(r)
}

/// Heavy-tail sequence against finite-`n` quadrature, and the small-`B` expansion.
pub fn expansion(tables: &dyn CountTableSource) -> Result<CheckReport> {
    let mut r = CheckReport::new("expansion");
    let n = 1_000_000;
    for beta in [1.5, 2.5] {
        for b in [0.5, 1.0] {
            let p = HeavyTailParams::new(beta, b, 1.0)?;
            let seq = heavy_a(&p, 6)?;
            let mut worst: f64 = 0.0;
            for k in 2..=6 {
                let finite = finite_n_a(&p, n, k)?;
                let limit = seq.get(k).expect("kmax 6");
                if limit != 0.0 {
                    worst = worst.max((finite / limit - 1.0).abs());
                }
            }
            r.push(
                format!("A_k vs n = 1e6, beta = {beta}, B = {b}"),
                worst < 0.05 && seq.get(2) == Some(1.0),
                format!("max relative error {worst:.4} for k <= 6"),
            );
        }
    }
    // A_k(B) = B^{(beta-1)(k/2-1)} A_k(1).
    let mut scaling: f64 = 0.0;
    for beta in [1.5, 2.5] {
        let one = heavy_a(&HeavyTailParams::new(beta, 1.0, 1.0)?, 6)?;
        let half = heavy_a(&HeavyTailParams::new(beta, 0.5, 1.0)?, 6)?;
        for k in [4, 6] {
            let expected = 0.5f64.powf((beta - 1.0) * (k as f64 / 2.0 - 1.0));
            let got = half.get(k).expect("kmax 6") / one.get(k).expect("kmax 6");
            scaling = scaling.max((got / expected - 1.0).abs());
        }
    }
    r.push("B-scaling exponent", scaling < 1e-12, format!("max relative error {scaling:.3e}"));

    for beta in [1.5, 2.0, 2.5] {
        let e = expansion_check(&HeavyTailParams::new(beta, 0.1, 2.0)?, 2, tables)?;
        let err = (e.lhs - e.rhs_a4).abs() / e.lhs.abs();
        r.push(
            format!("k = 2 identity lhs = alpha A_4, beta = {beta}"),
            err < 1e-12,
            format!("relative error {err:.3e}"),
        );
    }
    for beta in [1.5, 2.5] {
        for k in 2..=4u32.min(tables.guard()) {
            let scaled = |b: f64| -> Result<f64> {
                let e = expansion_check(&HeavyTailParams::new(beta, b, 2.0)?, k, tables)?;
                Ok(e.lhs / b.powf(beta - 1.0))
            };
            let ratio = scaled(0.1)? / scaled(0.05)?;
            r.push(
                format!("lhs/B^(beta-1) stabilisation, beta = {beta}, k = {k}"),
                (ratio - 1.0).abs() < 0.1,
                format!("B = 0.1 vs 0.05 ratio {ratio:.4}"),
            );
        }
    }
    for beta in [1.5, 2.0, 2.5] {
        for k in 2..=4u32.min(tables.guard()) {
            let e = expansion_check(&HeavyTailParams::new(beta, 0.01, 2.0)?, k, tables)?;
            let theorem = e
                .rhs_theorem
                .map_or("undefined (pole)".to_string(), |t| format!("{t:.6e}"));
            let ratio = e.ratio.map_or("-".to_string(), |x| format!("{x:.4}"));
            r.report(
                format!("printed coefficient, beta = {beta}, k = {k}, B = 0.01"),
                format!("lhs {:.6e}, rhs_A4 {:.6e}, rhs_theorem {theorem}, lhs/rhs_theorem {ratio}", e.lhs, e.rhs_a4),
            );
        }
    }
    Ok(r)
}

/// Log-log slope of `Var(M_2)` for the centred Bernoulli model.
pub fn variance(opts: &CheckOptions) -> Result<CheckReport> {
    let mut r = CheckReport::new("variance");
    let model = MatrixModel::Bernoulli(BernoulliParams::new(2.0, 5.0, true)?);
    let base = opts.n.unwrap_or(200);
    let ns = [base, 2 * base, 4 * base];
    let trials = opts.trials.unwrap_or(50);
    let v = variance_decay_test(&model, &ns, trials, 2, opts.seed)?;
    let points: Vec<String> = v.points.iter().map(|(n, var)| format!("n={n}: {var:.3e}")).collect();
    r.report("Var(M_2)", points.join(", "));
    let slope = v.slope.unwrap_or(f64::NAN);
    r.push(
        "log-log slope",
        (-1.6..=-0.5).contains(&slope),
        format!("{slope:.4} (alpha = 2, c = 5, {trials} trials)"),
    );
    Ok(r)
}

/// Population-dynamics Stieltjes transform against one simulated spectrum.
pub fn popdyn(opts: &CheckOptions) -> Result<CheckReport> {
    let mut r = CheckReport::new("popdyn");
    let p = BernoulliParams::new(2.0, 20.0, false)?;
    let n = opts.n.unwrap_or(3000);
    let cfg = PopdynConfig {
        pool_size: opts.pool_size.unwrap_or(100_000),
        sweeps: opts.sweeps.unwrap_or(200),
        seed: opts.seed,
        ..PopdynConfig::default()
    };
    let sample = sample_wishart_bernoulli(n, &p, opts.seed)?;
    let (a, b) = mp_edges(p.alpha);
    let (lo, hi) = (a + 0.2, b - 0.2);
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for i in 0..10 {
        let x = lo + (hi - lo) * i as f64 / 9.0;
        let z = Complex64::new(x, 0.1);
        let (m, res) = popdyn_wishart_stieltjes(&p, z, &cfg)?;
        all_converged &= res.converged;
        let gap = (m - empirical_stieltjes(&sample, z)?).norm();
        worst = worst.max(gap);
        r.report(format!("x = {x:.3}"), format!("|gap| = {gap:.4}"));
    }
    r.push(
        "popdyn vs empirical Stieltjes at x + 0.1i",
        worst < 0.02,
        format!("max gap {worst:.4} (n = {n}, pool {})", cfg.pool_size),
    );
    if !all_converged {
        r.report("convergence", "some runs did not pass the oscillation diagnostic");
    }
    Ok(r)
}

/// Trial-averaged moments against the limit, and the pooled histogram
/// against the first-order density.
pub fn montecarlo(opts: &CheckOptions, tables: &dyn CountTableSource) -> Result<CheckReport> {
    let mut r = CheckReport::new("montecarlo");
    let c = 20.0;
    let n = opts.n.unwrap_or(1500);
    let trials = opts.trials.unwrap_or(20);
    for alpha in [2.0, 4.0] {
        let p = BernoulliParams::new(alpha, c, true)?;
        let samples = run_trials(n, &MatrixModel::Bernoulli(p), trials, opts.seed)?;
        let limit = bernoulli_moments(&p, 5, tables)?;
        let per: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| empirical_moments(s, 5).map(|m| m.moments))
            .collect::<Result<_>>()?;
        for k in 1..=5 {
            let xs: Vec<f64> = per.iter().map(|m| m[k - 1]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let se = (sample_variance(&xs) / xs.len() as f64).sqrt();
            let target = limit.moments[k - 1];
            let z = if se > 0.0 { (mean - target) / se } else { f64::INFINITY };
            r.push(
                format!("M_{k}, alpha = {alpha}"),
                z.abs() < 3.0,
                format!("{mean:.5} vs {target:.5}, {z:+.2} SE (n = {n}, {trials} trials)"),
            );
        }
    }
    let fig_n = opts.n.map_or(3000, |n| 2 * n);
    let fig_trials = opts.trials.map_or(100, |t| 5 * t);
    for alpha in [2.0, 4.0] {
        let p = BernoulliParams::new(alpha, c, false)?;
        let samples = run_trials(fig_n, &MatrixModel::Bernoulli(p), fig_trials, opts.seed)?;
        let gap = figure_gap(&EmpiricalMeasure::pooled(&samples), alpha, c)?;
        r.push(
            format!("pooled histogram vs first-order density, alpha = {alpha}"),
            gap < 0.03,
            format!("sup bin gap {gap:.4} on the bulk (n = {fig_n}, {fig_trials} trials)"),
        );
    }
    Ok(r)
}

/// Largest gap between histogram bins inside `[a + 0.2, b - 0.2]` and the
/// bin averages of `rho_alpha + rho^(1)/c`.
pub fn figure_gap(pooled: &EmpiricalMeasure, alpha: f64, c: f64) -> Result<f64> {
    let range = crate::spectra::default_range(alpha);
    let h = pooled.histogram(DEFAULT_BINS, range)?;
    let (a, b) = mp_edges(alpha);
    let gl = GaussLegendre::new(16);
    let w = h.width();
    let mut worst: f64 = 0.0;
    for (&x, &d) in h.centers.iter().zip(&h.density) {
        let (lo, hi) = (x - 0.5 * w, x + 0.5 * w);
        if lo < a + 0.2 || hi > b - 0.2 {
            continue;
        }
        let theory = gl.integrate(lo, hi, |t| {
            crate::limitlaw::mp_density(t, alpha) + perturb_density(t, alpha) / c
        }) / w;
        worst = worst.max((d - theory).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treewords::TableCache;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn oracles_pass() {
        let r = oracles(1, &TableCache::default()).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn report_lines_do_not_fail() {
        let mut r = CheckReport::new("x");
        r.report("a", "b");
        assert!(r.passed());
        r.push("c", false, "d");
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        assert!(r.to_string().starts_with("INFO [x] a: b\nFAIL"));
    }
}
