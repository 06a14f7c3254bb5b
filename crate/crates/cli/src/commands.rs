use std::fmt::Write as _;
use std::fs;

use serde_json::{json, Value};
use wishart_core::bernoulli::{
    bernoulli_moments, default_epsilon, popdyn_wishart_density_curve, BernoulliParams, PopdynConfig,
};
use wishart_core::checks::{run_suite, CheckOptions, CheckReport, Suite};
use wishart_core::heavytail::{heavy_moments, HeavyTailParams};
use wishart_core::limitlaw::{
    limit_moments, mp_atom, mp_density, perturb_density, AsymptoticSequence,
};
use wishart_core::spectra::{
    default_range, empirical_moments, run_trials, sample_variance, write_sample, EmpiricalMeasure,
    MatrixModel, DEFAULT_BINS,
};
use wishart_core::treewords::{CountTableSource, COUNT_TABLE_SCHEMA_VERSION, DEFAULT_GUARD};

use crate::output::{density_csv, moments_csv, Sink};
use crate::params::{Command, Common, Format, Law, MomentModel, Params, SampleModel, SuiteArg};
use crate::{table_cache, CliError};

pub fn dispatch(cmd: Command, common: &Common, file: Params) -> Result<(), CliError> {
    let sink = Sink {
        out: common.out.clone(),
        format: common.format,
    };
    match cmd {
        Command::Enumerate(p) => enumerate(p.over(file), common, &sink),
        Command::Moments { model, params } => moments(model, params.over(file), common, &sink),
        Command::Density { law, params } => density("density", law, params.over(file), &sink),
        Command::Popdyn(p) => density("popdyn", Law::Popdyn, p.over(file), &sink),
        Command::Simulate {
            model,
            figure1,
            dump_dir,
            params,
        } => {
            let mut p = params.over(file);
            if figure1 {
                p = p.over(figure1_preset());
            }
            simulate(model, p, dump_dir, &sink)
        }
        Command::Check { suite, params } => check(suite, params.over(file), common, &sink),
    }
}

pub fn figure1_preset() -> Params {
    Params {
        alpha: Some(2.0),
        c: Some(20.0),
        n: Some(3000),
        trials: Some(100),
        ..Params::default()
    }
}

fn enumerate(mut p: Params, common: &Common, sink: &Sink) -> Result<(), CliError> {
    let k = p.k.ok_or(CliError::Missing("k"))?;
    let guard = *p.guard.get_or_insert(DEFAULT_GUARD);
    let cache = table_cache(common, Some(guard));
    let table = cache.count_table(k)?;
    let body = match sink.format {
        Format::Json => table.to_json()? + "\n",
        Format::Csv => {
            let mut s = String::from("a,s,l,b,count\n");
            for (key, count) in table.entries() {
                let b: Vec<String> = key.b.iter().map(u32::to_string).collect();
                writeln!(s, "{},{},{},{},{count}", key.a, key.s, key.l, b.join(";")).expect("String");
            }
            s
        }
    };
    sink.write(&body)?;
    sink.write_meta(
        "enumerate",
        None,
        &p,
        json!({
            "entries": table.len(),
            "total": table.total().to_string(),
            "schema_version": COUNT_TABLE_SCHEMA_VERSION,
        }),
    )
}

fn moments(model: MomentModel, mut p: Params, common: &Common, sink: &Sink) -> Result<(), CliError> {
    let kmax = *p.kmax.get_or_insert(6);
    let guard = *p.guard.get_or_insert(DEFAULT_GUARD);
    let alpha = *p.alpha.get_or_insert(2.0);
    let cache = table_cache(common, Some(guard));
    let mv = match model {
        MomentModel::Mp => {
            limit_moments(&AsymptoticSequence::marchenko_pastur(2 * kmax), alpha, kmax, &cache)?
        }
        MomentModel::Bernoulli => {
            let c = *p.c.get_or_insert(20.0);
            bernoulli_moments(&BernoulliParams::new(alpha, c, false)?, kmax, &cache)?
        }
        MomentModel::Heavy => {
            let beta = *p.beta.get_or_insert(2.0);
            let b = *p.b.get_or_insert(1.0);
            heavy_moments(&HeavyTailParams::new(beta, b, alpha)?, kmax, &cache)?
        }
        MomentModel::CustomA => {
            let values = p.a_values.clone().ok_or(CliError::Missing("a-values"))?;
            let gamma = values
                .iter()
                .enumerate()
                .map(|(i, v)| v.abs().powf(1.0 / (i + 2) as f64))
                .fold(0.0, f64::max);
            limit_moments(&AsymptoticSequence::new(values, gamma)?, alpha, kmax, &cache)?
        }
    };
    let body = match sink.format {
        Format::Csv => moments_csv(&mv.moments),
        Format::Json => serde_json::to_string_pretty(&json!({
            "model": model,
            "alpha": alpha,
            "moments": mv.moments,
        }))? + "\n",
    };
    sink.write(&body)?;
    sink.write_meta("moments", Some(json!(model)), &p, Value::Null)
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn density(command: &str, law: Law, mut p: Params, sink: &Sink) -> Result<(), CliError> {
    let alpha = *p.alpha.get_or_insert(2.0);
    let points = *p.points.get_or_insert(if law == Law::Popdyn { 40 } else { 200 });
    let (lo, hi) = default_range(alpha);
    let xmax = *p.xmax.get_or_insert(hi);
    let xmin = *p.xmin.get_or_insert(if law == Law::Popdyn { xmax / points as f64 } else { lo });
    if points < 2 || xmin.partial_cmp(&xmax) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::Config(format!(
            "grid needs at least 2 points and xmin < xmax, got {points} points on [{xmin}, {xmax}]"
        )));
    }
    let xs = grid(xmin, xmax, points);
    let mut stderr = None;
    let (dens, extra) = match law {
        Law::Mp => (xs.iter().map(|&x| mp_density(x, alpha)).collect(), json!({ "atom": mp_atom(alpha) })),
        Law::Perturb => (xs.iter().map(|&x| perturb_density(x, alpha)).collect(), Value::Null),
        Law::Combined => {
            let c = *p.c.get_or_insert(20.0);
            if !(c > 0.0 && c.is_finite()) {
                return Err(wishart_core::Error::InvalidParameter(format!("c must be positive, got {c}")).into());
            }
            let d = xs.iter().map(|&x| mp_density(x, alpha) + perturb_density(x, alpha) / c).collect();
            (d, json!({ "atom": mp_atom(alpha) }))
        }
        Law::Popdyn => {
            let c = *p.c.get_or_insert(20.0);
            let bp = BernoulliParams::new(alpha, c, false)?;
            let cfg = PopdynConfig {
                pool_size: *p.pool_size.get_or_insert(100_000),
                sweeps: *p.sweeps.get_or_insert(200),
                seed: *p.seed.get_or_insert(0),
                ..PopdynConfig::default()
            };
            let eps = *p.epsilon.get_or_insert(default_epsilon(c));
            let curve = popdyn_wishart_density_curve(&bp, &xs, Some(eps), &cfg)?;
            let mut warnings: Vec<String> = curve.runs.iter().filter_map(|r| r.warning.clone()).collect();
            warnings.dedup();
            stderr = Some(curve.stderr.clone());
            let extra = json!({
                "atom": curve.atom,
                "atom_hermitized": curve.atom_hermitized,
                "epsilon": curve.epsilon,
                "damping": cfg.damping,
                "all_converged": curve.all_converged(),
                "warnings": warnings,
            });
            (curve.density, extra)
        }
    };
    let body = match sink.format {
        Format::Csv => density_csv(&xs, &dens, stderr.as_deref()),
        Format::Json => serde_json::to_string_pretty(&json!({
            "x": xs,
            "density": dens,
            "stderr": stderr,
            "extra": extra,
        }))? + "\n",
    };
    sink.write(&body)?;
    sink.write_meta(command, Some(json!(law)), &p, extra)
}

fn simulate(model: SampleModel, mut p: Params, dump_dir: Option<std::path::PathBuf>, sink: &Sink) -> Result<(), CliError> {
    let alpha = *p.alpha.get_or_insert(2.0);
    let n = *p.n.get_or_insert(1000);
    let trials = *p.trials.get_or_insert(1);
    let seed = *p.seed.get_or_insert(0);
    let bins = *p.bins.get_or_insert(DEFAULT_BINS);
    let kmax = *p.kmax.get_or_insert(4) as usize;
    let (lo, hi) = default_range(alpha);
    let range = (*p.xmin.get_or_insert(lo), *p.xmax.get_or_insert(hi));
    let matrix_model = match model {
        SampleModel::Bernoulli => {
            let c = *p.c.get_or_insert(20.0);
            let centered = *p.centered.get_or_insert(false);
            MatrixModel::Bernoulli(BernoulliParams::new(alpha, c, centered)?)
        }
        SampleModel::Heavy => {
            let beta = *p.beta.get_or_insert(2.0);
            let b = *p.b.get_or_insert(1.0);
            MatrixModel::HeavyTail(HeavyTailParams::new(beta, b, alpha)?)
        }
    };
    let samples = run_trials(n, &matrix_model, trials, seed)?;
    if let Some(dir) = &dump_dir {
        fs::create_dir_all(dir)?;
        for (i, s) in samples.iter().enumerate() {
            write_sample(s, &dir.join(format!("trial_{i:04}.csv")))?;
        }
    }
    let pooled = EmpiricalMeasure::pooled(&samples);
    let hist = pooled.histogram(bins, range)?;

    let per_trial = samples
        .iter()
        .map(|s| empirical_moments(s, kmax).map(|m| m.moments))
        .collect::<Result<Vec<_>, _>>()?;
    let mut mean = Vec::with_capacity(kmax);
    let mut se = Vec::with_capacity(kmax);
    for k in 0..kmax {
        let xs: Vec<f64> = per_trial.iter().map(|m| m[k]).collect();
        mean.push(xs.iter().sum::<f64>() / xs.len() as f64);
        se.push(if xs.len() > 1 { (sample_variance(&xs) / xs.len() as f64).sqrt() } else { f64::NAN });
    }

    let body = match sink.format {
        Format::Csv => density_csv(&hist.centers, &hist.density, None),
        Format::Json => serde_json::to_string_pretty(&json!({
            "histogram": hist,
            "moments": { "mean": mean, "stderr": se },
        }))? + "\n",
    };
    sink.write(&body)?;
    let mut files = Vec::new();
    files.extend(sink.write_sibling(".moments.csv", &moments_csv(&mean))?);
    if let MatrixModel::Bernoulli(bp) = matrix_model {
        let mp: Vec<f64> = hist.centers.iter().map(|&x| mp_density(x, alpha)).collect();
        files.extend(sink.write_sibling(".mp.csv", &density_csv(&hist.centers, &mp, None))?);
        if bp.c > 0.0 {
            let first: Vec<f64> = hist
                .centers
                .iter()
                .zip(&mp)
                .map(|(&x, m)| m + perturb_density(x, alpha) / bp.c)
                .collect();
            files.extend(sink.write_sibling(".first_order.csv", &density_csv(&hist.centers, &first, None))?);
        }
    }
    let points = pooled.points();
    let extra = json!({
        "m": samples[0].m,
        "underflow": hist.underflow,
        "overflow": hist.overflow,
        "min_eigenvalue": points.first(),
        "max_eigenvalue": points.last(),
        "moments": { "mean": mean, "stderr": se },
        "files": files,
    });
    sink.write_meta("simulate", Some(json!(model)), &p, extra)
}

fn check(suite: SuiteArg, mut p: Params, common: &Common, sink: &Sink) -> Result<(), CliError> {
    let suites = match suite {
        SuiteArg::Oracles => vec![Suite::Oracles],
        SuiteArg::Expansion => vec![Suite::Expansion],
        SuiteArg::Variance => vec![Suite::Variance],
        SuiteArg::Popdyn => vec![Suite::Popdyn],
        SuiteArg::Montecarlo => vec![Suite::Montecarlo],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let opts = CheckOptions {
        seed: *p.seed.get_or_insert(0),
        n: p.n,
        trials: p.trials,
        pool_size: p.pool_size,
        sweeps: p.sweeps,
    };
    let cache = table_cache(common, p.guard);
    let reports = suites
        .into_iter()
        .map(|s| run_suite(s, &opts, &cache))
        .collect::<Result<Vec<CheckReport>, _>>()?;
    let body = match sink.format {
        Format::Csv => reports.iter().map(ToString::to_string).collect(),
        Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
    };
    sink.write(&body)?;
    let failed: usize = reports.iter().map(|r| r.failures().count()).sum();
    let summary: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "suite": r.suite, "passed": r.passed() }))
        .collect();
    sink.write_meta("check", Some(json!(suite)), &p, json!(summary))?;
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}
