//! Command-line driver: configuration, the `sweep`, `oracle`, `verify` and
//! `dump-maps` commands, and their CSV and JSON outputs.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use cli::{run, Cli, Command};
pub use config::{Overrides, ParamChoice, RunConfig};
pub use error::CliError;
