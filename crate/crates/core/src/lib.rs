//! Cyclic proximal coordinate descent for `min_x f(x) + sum_j g_j(x_j)`,
//! with finite-time model identification tracking and local linear rate
//! analysis through the spectral radius of the restricted epoch Jacobian.
//!
//! Supported estimators: Lasso, sparse logistic regression, elastic net and
//! the box-constrained SVM dual.

// `!(x > t)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod data_io;
pub mod error;
pub mod linalg;
pub mod losses;
pub mod penalties;
pub mod problem;
pub mod solver;
pub mod toys;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use linalg::{weighted_norm, DenseVector, SparseColMatrix};
pub use losses::{LinearState, SmoothLoss};
pub use penalties::{Penalty, SubdiffInterval};
pub use problem::{LossKind, ProblemInstance, StepSizes};
pub use solver::{solve, EpochRecord, SolverConfig, Trace};
