use std::io;

use thiserror::Error;

/// A violated data-model invariant.
#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("`{owner}` references unknown type `{missing}`")]
    DanglingReference { owner: String, missing: String },
    #[error("type hierarchy cycle through `{0}`")]
    HierarchyCycle(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("{0}")]
    Invalid(String),
}

/// Failure to load one of the line-delimited input files.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: String,
        line: usize,
        #[source]
        source: ValidationError,
    },
}

impl LoadError {
    pub(crate) fn invalid(path: &str, line: usize, source: ValidationError) -> Self {
        LoadError::Invalid {
            path: path.to_string(),
            line,
            source,
        }
    }

    pub(crate) fn io(path: &str, source: io::Error) -> Self {
        LoadError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Stable machine-readable kind name.
    pub fn kind(&self) -> &'static str {
        match self {
            LoadError::Io { .. } => "io",
            LoadError::Malformed { .. } => "malformed-record",
            LoadError::Invalid { source, .. } => match source {
                ValidationError::DuplicateId(_) => "duplicate-id",
                ValidationError::DanglingReference { .. } => "dangling-reference",
                ValidationError::HierarchyCycle(_) => "hierarchy-cycle",
                ValidationError::UnknownType(_) => "unknown-type",
                ValidationError::Invalid(_) => "invariant-violation",
            },
        }
    }
}
