use thiserror::Error;

/// Errors raised while building or querying indexes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("collection has no documents")]
    EmptyCollection,
    /// Document index and offset are 1-based.
    #[error("forbidden byte 0x00 in document {doc} at offset {offset}")]
    ForbiddenByte { doc: usize, offset: usize },
    #[error("pattern contains the terminator byte at offset {0}")]
    PatternTerminator(usize),
    #[error("position {pos} out of bounds 1..={len}")]
    OutOfBounds { pos: usize, len: usize },
    #[error("invalid range [{sp},{ep}] for length {len}")]
    InvalidRange { sp: usize, ep: usize, len: usize },
    #[error("array is empty")]
    EmptyArray,
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("malformed grammar: {0}")]
    MalformedGrammar(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("sequence is not non-increasing and positive at index {0}")]
    NotMonotone(usize),
    #[error("{runs} runs cannot sum to only {total}")]
    RunBound { runs: usize, total: usize },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("operation requires {expected} mode")]
    WrongMode { expected: &'static str },
    #[error("top-k merging needs stored frequencies")]
    MissingFreqs,
    #[error("structure `{0}` is missing from the index")]
    MissingStructure(String),
    #[error("structure `{0}` does not support this query mode")]
    Unsupported(String),
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("source of {have} bytes is too short, need {need}")]
    SourceTooShort { have: usize, need: usize },
    #[error("no document is long enough for patterns of length {0}")]
    PatternLengthExceedsDocs(usize),
    #[error("corrupt index file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
