//! Command-line front end for category collapsing: reads long-format count
//! files, runs the collapsing and model-fitting commands and renders their
//! reports.

pub mod data;
pub mod error;
pub mod report;
pub mod run;

pub use data::{
    read_counts, read_counts_from, write_counts, Dataset, SchemeConfig, VariableConfig,
};
pub use error::{CliError, CliResult};
pub use report::Precision;
pub use run::{run_command, Artifact, Command, Outcome, RunConfig};
