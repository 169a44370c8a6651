//! Experiment runner for the `selfsim` library: configuration, commands and
//! output formats behind the `selfsim` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, CliResult};
