//! Command-line front end: system files in, JSON results or CSV out.

pub mod commands;
pub mod format;
pub mod report;

pub use commands::{run, Cli, CommandError, Output};
