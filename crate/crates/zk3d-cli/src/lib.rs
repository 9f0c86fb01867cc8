//! Library surface of the CLI so the integration tests can parse configs,
//! re-read emitted CSV files and rebuild summaries.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod summary;
