use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid Pauli string {input:?}: {reason}")]
    ParsePauli { input: String, reason: String },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("insufficient design: {0}")]
    InsufficientDesign(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("sequence length {m} too large for exhaustive enumeration (limit {limit})")]
    TooLarge { m: usize, limit: usize },

    #[error("config error{}: {msg}", .line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("malformed dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
