use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("sentence `{0}` has no characters")]
    EmptySentence(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("emission matrix has {0} columns, expected 7")]
    TagCountMismatch(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("sentence id mismatch: expected `{expected}`, found `{found}`")]
    IdMismatch { expected: String, found: String },
    #[error("unknown tag label `{0}`")]
    UnknownTag(String),
    #[error("entity span [{start}, {end}) out of bounds for sentence of length {len}")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("entity text `{text}` does not match the sentence at [{start}, {end})")]
    TextMismatch { start: usize, end: usize, text: String },
    #[error("entities [{0}, {1}) and [{2}, {3}) overlap")]
    Overlap(usize, usize, usize, usize),
    #[error("invalid relation: {0}")]
    InvalidRelation(&'static str),
    #[error("dictionary is empty")]
    EmptyDictionary,
    #[error("dictionary contains an empty term")]
    EmptyTerm,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("training diverged: non-finite {0}")]
    NonFiniteLoss(String),
}

pub type Result<T> = core::result::Result<T, Error>;
