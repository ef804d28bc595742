//! Scenario files, batch commands and CSV export for the `linksched` binary.

pub mod commands;
pub mod error;
pub mod export;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use scenario::ScenarioFile;
