//! Command line front end: flat configuration files, subcommand
//! implementations, and the CSV and SVG report writers.

pub mod commands;
pub mod config;
pub mod csv;
pub mod plot;

pub use commands::CliError;
pub use config::{parse_config, ConfigError, StudyConfig};
