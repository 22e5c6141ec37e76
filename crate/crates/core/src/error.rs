use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the driftlab library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {malformed} of {total} lines are malformed (first bad line {first_bad})")]
    TooManyMalformed {
        path: PathBuf,
        malformed: usize,
        total: usize,
        first_bad: usize,
    },

    #[error("{path}: bad format: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every context position is masked; the example must be dropped")]
    EmptyContext,

    #[error("word not in vocabulary: {0}")]
    UnknownWord(String),

    #[error("zero-norm vector for word {0}")]
    ZeroNorm(String),

    #[error("alignment is underdetermined: {pairs} lexicon pairs for dimension {dim}")]
    Underdetermined { pairs: usize, dim: usize },

    #[error("cross-covariance is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("degenerate report: every word has zero total drift")]
    DegenerateReport,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite loss at epoch {epoch}, slice {slice}")]
    Diverged { epoch: usize, slice: usize },

    #[error("{0}")]
    Synth(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
