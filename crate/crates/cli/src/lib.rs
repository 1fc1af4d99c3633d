//! Experiment driver: configuration, traced runs, rate reports and plots.

pub mod config;
pub mod dataset;
pub mod error;
pub mod plot;
pub mod report;
pub mod run;
pub mod trace_csv;

pub use config::{Estimator, ExperimentConfig, Overrides};
pub use error::{CliError, ExitStatus};
pub use run::{cmd_analyze, cmd_fetch, cmd_fit, cmd_plot, run_experiment, Experiment, RunArtifacts};
