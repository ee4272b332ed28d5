use thiserror::Error;

use crate::kdml::SememeRef;
use crate::lexicon::SenseId;
use crate::taxonomy::SememeId;

/// Failure of a read-only query against a loaded taxonomy or lexicon.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown sememe id {0}")]
    UnknownSememe(SememeId),
    #[error("unknown sememe {0}")]
    UnresolvedSememe(SememeRef),
    #[error("unknown sense {0}")]
    UnknownSense(SenseId),
    #[error("no such word: {0}")]
    NoSuchWord(String),
    #[error("k must be at least 1")]
    InvalidK,
}

impl QueryError {
    /// Stable kind name used in machine-readable error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            QueryError::UnknownSememe(_) | QueryError::UnresolvedSememe(_) => "UnknownSememe",
            QueryError::UnknownSense(_) => "UnknownSense",
            QueryError::NoSuchWord(_) => "NoSuchWord",
            QueryError::InvalidK => "InvalidK",
        }
    }
}
