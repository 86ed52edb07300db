//! Library side of the `uq` command: CSV ingestion, configuration
//! resolution, output tables and the run manifest.

pub mod config;
pub mod ingest;
pub mod manifest;
pub mod output;
