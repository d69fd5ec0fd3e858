//! Command-line experiment runner for `bts-core`: TOML experiment files, a
//! rayon-backed replicator and the CSV outputs.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ConfigError, Experiment, ExperimentFile, VerifySettings};
pub use runner::{run_experiments, run_verification, Options, Parallel, RunError};
