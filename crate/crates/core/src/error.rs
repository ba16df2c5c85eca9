use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("matrix is not symmetric: |M[{i}][{j}] - M[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (reconstruction residual {residual:e})")]
    NumericalFailure { sweeps: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no witness with positive margin found (min eigenvalue {min_eigenvalue:e})")]
    MarginNotFound { min_eigenvalue: f64 },

    #[error("n = {n} exceeds enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },

    #[error("line {line}: malformed entry {token:?}")]
    MalformedEntry { line: usize, token: String },

    #[error("line {line}: non-finite entry {token:?}")]
    NonFiniteEntry { line: usize, token: String },

    #[error("line {line}: expected {expected} entries, found {found}")]
    EntryCount {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("certificate: {0}")]
    Certificate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
