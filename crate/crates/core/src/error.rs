use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A stand-off line that could not be parsed. `file` is filled in on the corpus path.
    #[error("{}line {line}: {message}", file_prefix(.file))]
    MalformedLine {
        file: Option<PathBuf>,
        line: usize,
        message: String,
    },

    /// A line of the encoded-sequence TSV that could not be parsed.
    #[error("{}line {line}: {message}", file_prefix(.file))]
    MalformedSequence {
        file: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("document `{doc_id}` has {count} validation error(s)")]
    InvalidDocument { doc_id: String, count: usize },

    #[error("document `{doc_id}` is not canonical")]
    NonCanonical { doc_id: String },

    #[error("gold document `{gold}` compared against prediction for `{pred}`")]
    DocIdMismatch { gold: String, pred: String },

    #[error("prediction for `{0}` has no gold document")]
    UnknownPrediction(String),

    #[error("document `{0}` has different text in the two corpora")]
    TextMismatch(String),

    #[error("label sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("rating row {row} sums to {sum}, expected {expected}")]
    RowSum {
        row: usize,
        sum: usize,
        expected: usize,
    },

    #[error("inconsistent sequence: {0}")]
    InconsistentSequence(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn file_prefix(file: &Option<PathBuf>) -> String {
    match file {
        Some(path) => format!("{}: ", path.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file name to line-level parse errors.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::MalformedLine { line, message, .. } => Error::MalformedLine {
                file: Some(path.into()),
                line,
                message,
            },
            Error::MalformedSequence { line, message, .. } => Error::MalformedSequence {
                file: Some(path.into()),
                line,
                message,
            },
            other => other,
        }
    }
}
