use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("invalid sparse structure: {0}")]
    Structure(String),

    #[error("value {value} is outside the penalty domain")]
    Domain { value: f64 },

    /// The prox is not differentiable at this input. Reaching this from the
    /// analysis means the problem is degenerate (qualification fails).
    #[error("prox is not differentiable at z = {value}")]
    NonDifferentiable { value: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("objective became non-finite at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("reference solution did not converge within {epochs} epochs (witness norm {witness_norm:e})")]
    NoReference { epochs: usize, witness_norm: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("eigenvalue computation failed; Gelfand estimate {gelfand}")]
    Eigen { gelfand: f64 },

    #[error("not enough clean epochs for a rate estimate: have {available}, need {needed}")]
    InsufficientWindow { available: usize, needed: usize },

    #[error("trace has no iterate snapshots or reference distances")]
    MissingSnapshots,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("fetch failed: {0}")]
    Fetch(String),

    #[error("sha256 mismatch for {path}: expected {expected}, found {found}")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
