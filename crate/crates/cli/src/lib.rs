//! The `wishart` command-line tool.

pub mod commands;
pub mod output;
pub mod params;

use std::path::PathBuf;

use thiserror::Error;
use wishart_core::treewords::{TableCache, DEFAULT_GUARD};

pub use params::{Cli, Command, Common, Params};

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_GUARD: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_CHECK_FAILED: u8 = 5;

/// Overrides the count-table cache directory when `--cache-dir` is absent.
pub const CACHE_DIR_ENV: &str = "WISHART_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wishart_core::Error),

    #[error("configuration: {0}")]
    Config(String),

    #[error("missing required parameter --{0}")]
    Missing(&'static str),

    #[error("{0} check(s) failed")]
    CheckFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use wishart_core::Error as E;
        match self {
            CliError::Core(E::ResourceLimit { .. }) => EXIT_GUARD,
            CliError::Core(E::Numeric(_)) => EXIT_NUMERIC,
            CliError::Core(
                E::InvalidParameter(_) | E::Domain(_) | E::MalformedWord(_) | E::Pole { .. } | E::NonIntegrable(_),
            ) => EXIT_INVALID,
            CliError::Config(_) | CliError::Missing(_) => EXIT_INVALID,
            CliError::CheckFailed(_) => EXIT_CHECK_FAILED,
            CliError::Core(_) | CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}

pub fn table_cache(common: &Common, guard: Option<u32>) -> TableCache {
    let guard = guard.unwrap_or(DEFAULT_GUARD);
    let dir = common
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from));
    match dir {
        Some(dir) => TableCache::with_dir(dir, guard),
        None => TableCache::in_memory(guard),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.common.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let file = match &cli.common.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    commands::dispatch(cli.command, &cli.common, file)
}
