use std::path::PathBuf;

use localsyn::SynthError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read config file {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config file {path}: {source}")]
    ParseConfig {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(#[from] SynthError),

    #[error("{failed} of {total} sweep solves failed")]
    SweepFailures { failed: usize, total: usize },

    #[error("verification failed: {0} check(s) did not pass")]
    Verification(usize),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            Self::Config(_) | Self::ReadConfig { .. } | Self::ParseConfig { .. } | Self::Write { .. } => 2,
            Self::Numerical(SynthError::InvalidConfig(_)) => 2,
            Self::Numerical(_) | Self::SweepFailures { .. } => 3,
        }
    }
}
