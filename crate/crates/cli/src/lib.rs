//! Experiment runner: configuration, initial data, persistence and the
//! subcommands of the `cch` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod inequalities;
pub mod initial;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
