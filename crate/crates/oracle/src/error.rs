#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Core(#[from] datared_core::Error),
    #[error("invalid system: {0}")]
    System(String),
    #[error("invalid campaign config: {0}")]
    Config(String),
}

pub type Result<T, E = OracleError> = std::result::Result<T, E>;
