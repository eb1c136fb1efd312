use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AimeError>;

#[derive(Debug, Error)]
pub enum AimeError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("index {index} out of range for {what} of length {len}")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e}){hint}")]
    Definiteness {
        pivot: usize,
        value: f64,
        hint: &'static str,
    },

    #[error("iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sample alignment failed: {0}")]
    Alignment(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("parse error at line {line}{}: {msg}", .column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        msg: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("forward cache does not match network: {0}")]
    Cache(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AimeError {
    pub(crate) fn shape(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        AimeError::Shape { op, left, right }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AimeError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics rather than of the user's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            AimeError::Convergence { .. } | AimeError::Numerical(_)
        )
    }
}
