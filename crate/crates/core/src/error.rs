use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("no link {from} -> {to}")]
    MissingLink { from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("invalid metrics configuration: {0}")]
    InvalidConfig(String),
    #[error("power-law fit needs at least 3 non-empty bins in range, found {found}")]
    InsufficientData { found: usize },
}
