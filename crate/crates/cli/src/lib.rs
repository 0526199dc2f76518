//! Configuration-driven experiment runner for the ehlab cores.
//!
//! A run reads one JSON config, validates every parameter, computes the
//! experiment in memory, writes its CSV/JSON artifacts and finally a
//! manifest. `plot` turns a manifest into gnuplot scripts.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod plot;

pub use config::{Experiment, ExperimentConfig};
pub use manifest::{run, ArtifactRecord, Manifest, MANIFEST_FILE};
pub use plot::emit_plot_scripts;

/// Environment variable capping the worker-thread count.
pub const THREADS_VAR: &str = "EHLAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<ehlab_core::Error> for CliError {
    fn from(e: ehlab_core::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

/// Thread cap from the value of [`THREADS_VAR`]; `None` means machine parallelism.
pub fn parse_thread_cap(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_VAR}: expected a positive integer, got `{v}`"))),
        },
    }
}
