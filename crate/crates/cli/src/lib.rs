//! Scenario runner for the catlattice simulator.

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;
pub mod selftest;
pub mod sweep;

pub use config::{resolve, ConfigFile, Scenario};
pub use error::CliError;
pub use output::{read_config, Format, ResultTable};
