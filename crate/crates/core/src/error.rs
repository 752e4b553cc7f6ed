use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("malformed table: {0}")]
    Table(String),

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("context has missing cells; the Galois closure needs a complete context")]
    IncompleteContext,

    #[error("itemset {0} has zero support; its closure is undefined")]
    ZeroSupport(String),

    #[error("minimum support must be at least 1, got {0}")]
    InvalidMinsup(u64),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("injection: {0}")]
    Injection(String),

    #[error("tables do not line up: {0}")]
    Mismatch(String),

    #[error("config: {0}")]
    Config(String),
}
