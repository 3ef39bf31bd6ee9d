use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("symbol {value} out of range for GF({q})")]
    SymbolOutOfRange { value: usize, q: usize },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error("invalid parity-check matrix: {0}")]
    InvalidMatrix(String),
    #[error("information length {got} does not match code dimension {expected} (effective rank {rank})")]
    InfoLength {
        got: usize,
        expected: usize,
        rank: usize,
    },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate channel: both gains are zero")]
    DegenerateChannel,
    #[error("observation has zero likelihood under every hypothesis (symbol {0})")]
    ZeroLikelihood(usize),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("check-relation-tab too large: {0}")]
    TabTooLarge(String),

    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
