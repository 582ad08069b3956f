//! Configuration, command dispatch and CSV output for the `llg` binary.

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_config, serialize_config, Command, ExperimentParams, RunConfig};
pub use error::{CliError, Result};
pub use run::{config_hash, print_version_and_provenance, resolve_output_dir, run, RunOutcome};
