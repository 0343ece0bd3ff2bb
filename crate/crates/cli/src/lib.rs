//! Command-line harness around `mbrank-core`: dataset files, synthetic data
//! export, benchmark sweeps and scoring.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, CliResult};
