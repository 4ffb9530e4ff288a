//! Command-line front end for `optbasis`: configuration, the four
//! subcommands and their CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::CliError;
