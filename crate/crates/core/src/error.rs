use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeError {
    #[error("family mismatch: expected {expected}, found {found}")]
    FamilyMismatch { expected: String, found: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0} is not in B: no non-zero function is supported on its double coset")]
    NotInB(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("indeterminate at precision {precision}: {reason}")]
    Indeterminate { precision: i64, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HeckeError>;
