//! Command-line front end: configuration parsing, command dispatch and file emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

pub use commands::{run_command, Command, Report, RunOptions};
pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
pub use output::{Table, TOOL};
