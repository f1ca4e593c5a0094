use thiserror::Error;

/// Errors shared by all layers of the crate.
#[derive(Error, Debug)]
pub enum RmtError {
    /// Invalid (space, density) combination or malformed specification.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched weight families, domains, or arities.
    #[error("type error: {0}")]
    Type(String),
    /// A numeric routine could not reach the requested tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// Non-finite entries or otherwise unusable sample data.
    #[error("data error: {0}")]
    Data(String),
    /// Symbolic term count exceeded the configured cap.
    #[error("resource error: {0}")]
    Resource(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RmtError>;
