//! Library side of the `spearfact` command-line tool: CSV and config
//! parsing, panel ingestion and the command implementations.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod ingest;

pub use error::{CliError, CliResult};
