//! Sweep configuration, results tables and finite-size reports for the
//! `clustersim` command-line tool.

pub mod config;
pub mod error;
pub mod report;
pub mod sweep;
pub mod table;

pub use config::{SweepConfig, SweepPoint};
pub use error::{CliError, CliResult};
pub use table::{Row, Table};
