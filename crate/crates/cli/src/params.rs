use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "wishart", version, about = "Limiting spectral laws of sparse and heavy-tailed Wishart matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output file; stdout when absent. Metadata goes to `<out>.meta.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Count-table cache directory (also `WISHART_CACHE_DIR`).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    /// JSON file of parameters; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact tree-word count table for one half-length.
    Enumerate(#[command(flatten)] Params),
    /// Limit moments of a model.
    Moments {
        #[arg(long, value_enum, default_value_t = MomentModel::Mp)]
        model: MomentModel,
        #[command(flatten)]
        params: Params,
    },
    /// Density curve on a grid.
    Density {
        #[arg(long, value_enum, default_value_t = Law::Mp)]
        law: Law,
        #[command(flatten)]
        params: Params,
    },
    /// Sample random matrices and histogram the pooled spectrum.
    Simulate {
        #[arg(long, value_enum, default_value_t = SampleModel::Bernoulli)]
        model: SampleModel,
        /// alpha = 2, c = 20, n = 3000, 100 trials unless overridden.
        #[arg(long)]
        figure1: bool,
        /// Directory for per-trial eigenvalue dumps.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[command(flatten)]
        params: Params,
    },
    /// Population-dynamics density of the Bernoulli limit law.
    Popdyn(#[command(flatten)] Params),
    /// Run a self-check suite.
    Check {
        #[arg(long, value_enum, default_value_t = SuiteArg::Oracles)]
        suite: SuiteArg,
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentModel {
    Mp,
    Bernoulli,
    Heavy,
    CustomA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Mp,
    Perturb,
    Combined,
    Popdyn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleModel {
    Bernoulli,
    Heavy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteArg {
    Oracles,
    Expansion,
    Variance,
    Popdyn,
    Montecarlo,
    All,
}

/// Numeric parameters shared by all subcommands. Every field is optional so
/// that flags, the config file and command defaults can be layered.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long = "B")]
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Broadening in the hermitized variable.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Subtract the entry mean (Bernoulli model).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centered: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xmin: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xmax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Largest half-length the enumerator will attempt.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<u32>,
    /// `A_2, A_3, ...` for `--model custom-a`, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_values: Option<Vec<f64>>,
}

macro_rules! layer {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        Params { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Params {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: Params) -> Params {
        layer!(self, lower; alpha, c, beta, b, k, kmax, n, trials, seed, epsilon, pool_size,
            sweeps, bins, centered, xmin, xmax, points, guard, a_values)
    }

    pub fn from_file(path: &Path) -> Result<Params, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}
