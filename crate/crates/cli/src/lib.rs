//! Config parsing and experiment dispatch for the `csbohm` binary.

pub mod config;
pub mod runner;

pub use config::{ConfigFile, ExperimentConfig, ExperimentKind};
pub use runner::{run_experiment, write_artifacts, Artifacts};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    /// The experiment ran but did not meet its criterion, or a numerical
    /// precondition failed during the run.
    #[error("experiment failed: {0}")]
    ExperimentFailed(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::ExperimentFailed(_) | CliError::Output(_) => 1,
        }
    }
}
