use std::path::PathBuf;

/// Errors surfaced by construction, validation, solves and output.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("edge {edge} lies on the boundary; jumps and averages need an interior edge")]
    BoundaryTrace { edge: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("value {value} outside the domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("linear solve failed: relative residual {residual:.3e}, condition estimate {condition:.3e}")]
    Solver { residual: f64, condition: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
