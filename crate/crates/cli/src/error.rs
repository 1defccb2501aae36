use std::path::PathBuf;

use datared_core::Error as CoreError;
use datared_oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn core_code(e: &CoreError) -> u8 {
    match e {
        CoreError::Io { .. }
        | CoreError::Parse(_)
        | CoreError::Dimension(_)
        | CoreError::Data(_)
        | CoreError::Parameter(_)
        | CoreError::Knowledge(_) => 1,
        CoreError::DegenerateData(_) | CoreError::Rank(_) => 2,
        CoreError::Solver(_) => 4,
        CoreError::Subspace(_) => 5,
        CoreError::EmptyW(_) | CoreError::Reachability(_) => 6,
    }
}

impl CliError {
    /// 1 input, 2 degenerate data, 4 solver, 5 subspace, 6 reachability
    /// (3, infeasible, is a successful run with a negative verdict).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::Oracle(OracleError::Core(e)) => core_code(e),
            CliError::Oracle(_) | CliError::Input(_) | CliError::Write { .. } => 1,
        }
    }
}
