//! Batch front end: simulate, reconstruct, report, or all three in one go.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;

pub use config::{Emit, RunConfig};
pub use error::{CliError, Result};
