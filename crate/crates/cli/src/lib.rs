//! File formats, configuration and reports around `revkam_core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod spec_file;

pub use commands::{dispatch, Command};
pub use config::{CandidateKind, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{Output, Report, Table};
pub use spec_file::{parse_system, parse_system_str, LoadedSystem, SystemSpecFile, Truncation};
