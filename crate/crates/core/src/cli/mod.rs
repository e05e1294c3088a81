//! Command-line layer: configuration, dispatch, and artifact writers.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

pub use commands::run_command;
pub use config::{Cli, CommandKind, RunConfig};
