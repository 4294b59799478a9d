//! Command-line front end for `spectral-dae`.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod output;
pub mod problem;

pub use commands::{run, Cli, Command};
pub use output::{read_records, write_records, Format, Record};
pub use problem::{load_problem, parse_problem, Problem};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SPECTRAL_DAE_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Numerical(spectral_dae::Error),
    /// Solver stopped early; the partial trajectory was written.
    #[error("solver failed at step {step}: {reason}")]
    FailedAtStep { step: usize, reason: spectral_dae::Error },
}

impl From<spectral_dae::Error> for CliError {
    fn from(e: spectral_dae::Error) -> Self {
        match e {
            spectral_dae::Error::InvalidInput(m) => CliError::Usage(m),
            e => CliError::Numerical(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) | CliError::FailedAtStep { .. } => 1,
        }
    }
}
