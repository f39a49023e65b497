//! File formats, verification suites and the experiment driver built on
//! `deckrec-core`.
//!
//! The `deckrec` binary exposes six subcommands (`simulate`,
//! `estimate-deck`, `recover`, `lowerbound`, `certificate`, `verify`). Each
//! reads a JSON config whose keys are also accepted as flags, and prints a
//! JSON result carrying the config hash, seed and library version.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod reports;
pub mod schemas;
pub mod suites;

pub use commands::{run, Command, Outcome};
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
