//! Configuration, sweeps and CSV output behind the `capacity-lab` binary.

pub mod commands;
pub mod config;
pub mod format;

pub use commands::{run_command, RunContext, RunSummary};
pub use config::{Command, RunConfig};
