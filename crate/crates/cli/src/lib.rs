//! Library side of the command-line harness: experiment configuration, the
//! experiment pipeline, text formats for cascade and priority specs, and
//! report serialization. The binary in `main.rs` is a thin front end.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, seed_existing_cascades};
pub use report::{emit_report, ExperimentReport};
