//! Command-line front end for `backbone_core`: configuration handling and
//! the `ingest`, `sweep`, `backbone`, `stats` and `report` subcommands.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{Cli, Command, Flags, Settings};
pub use error::CliError;

/// Resolves the settings, sizes the worker pool and runs the command.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(cli.command.flags().clone())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = settings.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| commands::execute(&cli.command, &settings))
}
