use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use wishart_core::rng::RNG_ALGORITHM;
use wishart_core::spectra::sidecar_path;

use crate::params::{Format, Params};
use crate::CliError;

/// Where the primary artifact and its metadata go.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Sink {
    pub fn write(&self, body: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => fs::write(path, body).map_err(|e| io_error(path, e)),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    /// Writes `<out><suffix>` next to the primary output; skipped on stdout.
    pub fn write_sibling(&self, suffix: &str, body: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(out) = &self.out else {
            return Ok(None);
        };
        let mut s = out.as_os_str().to_owned();
        s.push(suffix);
        let path = PathBuf::from(s);
        fs::write(&path, body).map_err(|e| io_error(&path, e))?;
        Ok(Some(path))
    }

    /// `mode` is the law, model or suite selected on the command line.
    pub fn write_meta(
        &self,
        command: &str,
        mode: Option<Value>,
        params: &Params,
        extra: Value,
    ) -> Result<(), CliError> {
        let meta = json!({
            "tool": "wishart",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "mode": mode,
            "format": self.format,
            "params": params,
            "rng": RNG_ALGORITHM,
            "results": extra,
        });
        let text = serde_json::to_string_pretty(&meta)? + "\n";
        match &self.out {
            Some(path) => {
                let side = sidecar_path(path);
                fs::write(&side, text).map_err(|e| io_error(&side, e))
            }
            None => {
                eprint!("{text}");
                Ok(())
            }
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// `x,density[,stderr]`.
pub fn density_csv(x: &[f64], density: &[f64], stderr: Option<&[f64]>) -> String {
    let mut s = String::from(if stderr.is_some() { "x,density,stderr\n" } else { "x,density\n" });
    for (i, (x, d)) in x.iter().zip(density).enumerate() {
        match stderr {
            Some(se) => writeln!(s, "{x},{d},{}", se[i]),
            None => writeln!(s, "{x},{d}"),
        }
        .expect("writing to a String");
    }
    s
}

/// `k,moment` with `k` starting at 1.
pub fn moments_csv(moments: &[f64]) -> String {
    let mut s = String::from("k,moment\n");
    for (i, m) in moments.iter().enumerate() {
        writeln!(s, "{},{m}", i + 1).expect("writing to a String");
    }
    s
}
