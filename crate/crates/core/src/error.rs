use std::path::PathBuf;

use thiserror::Error;

use crate::solver::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// Variants split into data problems (invalid values, malformed files,
/// mismatched shapes) and solver problems (instance/algorithm mismatch,
/// exhausted search budget); the CLI maps the two groups to distinct exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    #[error("dimension mismatch: {left}, but {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("unknown home id `{home_id}` in {context}")]
    UnknownHome { home_id: String, context: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{homes} homes exceeds the exhaustive-search limit of {limit}; use the branch-and-bound solver instead")]
    ExhaustiveLimit { homes: usize, limit: usize },

    #[error("branch-and-bound node limit {limit} exceeded")]
    NodeLimit {
        limit: u64,
        /// Best allocation found before the limit was hit, if any.
        incumbent: Option<Box<SolverReport>>,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }

    /// True for failures of the search itself rather than of the input data.
    pub fn is_solver_error(&self) -> bool {
        matches!(
            self,
            Error::ExhaustiveLimit { .. } | Error::NodeLimit { .. }
        )
    }
}
