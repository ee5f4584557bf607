//! Batch experiment driver: configuration, seeded runs, sweeps and CSV/JSON
//! output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{Cli, RunConfig};
pub use error::CliError;
pub use run::{run, RunOutput};

use std::io::Write;

/// Writes a run's outputs to disk (or standard output).
pub fn write_output(config: &RunConfig, out: &RunOutput) -> Result<(), CliError> {
    match &config.output_path {
        Some(path) => std::fs::write(path, &out.primary)?,
        None => std::io::stdout().write_all(out.primary.as_bytes())?,
    }
    for (path, text) in &out.extra_files {
        std::fs::write(path, text)?;
    }
    Ok(())
}

/// Sizes the global rayon pool from `DSEU_THREADS` (default: all cores).
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("DSEU_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DSEU_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}
