use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("row {row} of the matrix is zero, so its column scale factor is undefined")]
    ZeroRow { row: usize },

    #[error(
        "diagonal entry {index} is zero; the identity initial pattern yields a zero column, \
         use the pattern-of-A initial pattern instead"
    )]
    ZeroDiagonal { index: usize },

    #[error("GMRES produced a non-finite value at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
