//! Configuration, orchestration and dataset export for the `nhbath` binary.

pub mod config;
pub mod export;
pub mod run;

use std::path::PathBuf;

pub use config::{apply_override, config_from_value, parse_config, Experiment, ExperimentConfig};
pub use run::{build_id, compute, run_experiment};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{op} failed: {source}")]
    Model {
        op: &'static str,
        #[source]
        source: nhbath::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
