use std::path::Path;

use thiserror::Error;

/// Front-end failures, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<phasegate::Error> for CliError {
    fn from(e: phasegate::Error) -> Self {
        use phasegate::Error as E;
        match e {
            E::InvalidConfig { .. } | E::ZeroEfficiency(_) => CliError::Config(e.to_string()),
            E::Format(_)
            | E::MissingSettings(_)
            | E::NoCounts
            | E::RankDeficient { .. }
            | E::WrongStateCount { .. } => CliError::Data(e.to_string()),
            E::DimensionMismatch(_)
            | E::NotHermitian(_)
            | E::ImpossibleBranch(_)
            | E::AnnihilatingMap(_)
            | E::NotRankOne(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
