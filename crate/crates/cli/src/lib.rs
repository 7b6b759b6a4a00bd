//! Command-line front end: instance files, mechanism runs, verification
//! scans and demonstrations.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod schema;

pub use commands::{execute, run_and_report, Execution};
pub use config::{Command, Format, RunConfig};
pub use error::{exit, CliError, CliResult};
pub use schema::{load_instance, InstanceDoc, Loaded};
