pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

pub use commands::{run_subcommand, Outcome, RunError};
pub use config::{merge, parse_config, ConfigError, RunConfig, Subcommand};
