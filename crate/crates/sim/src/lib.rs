//! Experiment harness for `sleepwake-core`: run configuration, the
//! closed-loop simulation driver, metric series and their CSV formats, and
//! multi-run comparison tables.

pub mod config;
pub mod csv_format;
pub mod error;
pub mod harness;
pub mod matrix_io;
pub mod metrics;

pub use config::{Algorithm, RunConfig};
pub use error::{Error, Result};
pub use harness::run_experiment;
pub use metrics::{MetricsSeries, RunSummary, StepRecord};
