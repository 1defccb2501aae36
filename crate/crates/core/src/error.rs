use std::path::PathBuf;

/// Errors raised along the data-driven path.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("rank deficient: {0}")]
    Rank(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("subspace violation: {0}")]
    Subspace(String),
    #[error("missing input knowledge: {0}")]
    Knowledge(String),
    #[error("no admissible input direction: {0}")]
    EmptyW(String),
    #[error("unreachable: {0}")]
    Reachability(String),
    #[error(transparent)]
    Solver(#[from] crate::stabilization::sdp::SolverError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Dimension(what()))
    }
}
