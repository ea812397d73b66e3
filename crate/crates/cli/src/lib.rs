//! Library half of the batch driver: configuration parsing and experiment
//! orchestration, kept separate from the binary so integration tests can
//! exercise the full pipeline in process.

pub mod config;
pub mod run;

pub use config::{parse_config, Command, ConfigIssue, RunConfig};
pub use run::{run, RunError, RunSummary};
