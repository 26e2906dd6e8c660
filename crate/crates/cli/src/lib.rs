//! Command-line driver: configuration, subcommands and their reports.

pub mod config;
pub mod converge;
pub mod demo;
pub mod error;
pub mod estimate;
pub mod format;
pub mod prepare;
pub mod slope;

pub use error::{CliError, CliResult};
