use thiserror::Error;

use crate::vset::VSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {message}{}", witness_suffix(.witness))]
    InvalidArgument {
        message: String,
        witness: Option<VSet>,
    },
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    /// An internal consistency check failed. Reaching this is a bug or a
    /// counterexample to a claimed property.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
}

fn witness_suffix(w: &Option<VSet>) -> String {
    match w {
        Some(w) => format!(" (witness {w})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            message: message.into(),
            witness: None,
        }
    }

    pub(crate) fn invalid_with(message: impl Into<String>, witness: VSet) -> Self {
        Error::InvalidArgument {
            message: message.into(),
            witness: Some(witness),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
