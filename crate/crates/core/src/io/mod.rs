//! File formats and the command-line runner.

pub mod config;
pub mod export;
pub mod ingest;
pub mod synth;
