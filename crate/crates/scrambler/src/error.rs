use std::io;
use std::path::PathBuf;

use scrambler_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const ENUMERATION_CAP: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const LOOKUP: i32 = 5;
    pub const VERIFICATION: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: invalid tree file: {message}")]
    TreeFormat { path: PathBuf, message: String },
    #[error("{0}")]
    Lookup(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CoreError::EnumerationCapExceeded { .. } => exit::ENUMERATION_CAP,
                CoreError::InfeasibleParameters(_)
                | CoreError::EmptyCandidateSet { .. }
                | CoreError::FamilyExhausted { .. }
                | CoreError::OverflowRisk { .. } => exit::INFEASIBLE,
                CoreError::HorizonExceeded { .. } | CoreError::IndexOutOfRange { .. } => exit::LOOKUP,
                _ => exit::PARSE,
            },
            CliError::Lookup(_) => exit::LOOKUP,
            CliError::Parse(_) | CliError::Io { .. } | CliError::TreeFormat { .. } => exit::PARSE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
