use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter or grid failed validation.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0} out of range")]
    Range(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("matrix is not symmetric: |H[{row}][{col}] - H[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("integration failed{}: {reason}", context.as_deref().map(|c| format!(" at {c}")).unwrap_or_default())]
    Integration {
        reason: String,
        context: Option<String>,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach the offending parameter point to an integration failure.
    pub fn with_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::Integration { reason, .. } => Error::Integration {
                reason,
                context: Some(ctx.into()),
            },
            other => other,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 config error, 3 integration failure, 4 IO error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. }
            | Error::Parse { .. }
            | Error::Range(_)
            | Error::Dimension { .. }
            | Error::NotSymmetric { .. }
            | Error::EmptyInput(_) => 2,
            Error::Integration { .. } => 3,
            Error::Io { .. } | Error::Format(_) => 4,
        }
    }
}
