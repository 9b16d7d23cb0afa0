//! Command-line front end: CSV ingestion, pipeline wiring and versioned
//! JSON/CSV artifact output.

pub mod commands;
pub mod error;
pub mod ingest;

pub use commands::{read_artifacts, run, Cli, Command};
pub use error::{CliError, CliResult};
pub use ingest::{ingest_csv, IngestMode, Ingested};
