//! Small hand-checkable problem instances.

use crate::linalg::SparseColMatrix;
use crate::problem::ProblemInstance;

/// Orthogonal 2x2 Lasso: `A = I`, `y = (3, 0.5)`, `n = 2`, `lambda = 1`.
///
/// The solution is `(1, 0)` and cyclic descent with `gamma = (2, 2)` reaches
/// it in one epoch.
pub fn toy_t1() -> ProblemInstance {
    let a = SparseColMatrix::from_dense(2, 2, &[1.0, 0.0, 0.0, 1.0]).expect("static toy");
    ProblemInstance::lasso(a, vec![3.0, 0.5].into(), 1.0).expect("static toy")
}

/// Lasso whose first two columns are identical, making the Hessian block
/// on the support singular when both are active.
///
/// Start the solver from [`toy_duplicated_x0`] to land on a minimizer that
/// uses both copies.
pub fn toy_duplicated_columns() -> ProblemInstance {
    #[rustfmt::skip]
    let dense = [
        1.0, 1.0, 0.2,
        0.5, 0.5, -1.0,
        -0.3, -0.3, 0.4,
        0.8, 0.8, 0.1,
    ];
    let a = SparseColMatrix::from_dense(4, 3, &dense).expect("static toy");
    ProblemInstance::lasso(a, vec![2.0, 0.7, -0.4, 1.5].into(), 0.05).expect("static toy")
}

pub fn toy_duplicated_x0() -> Vec<f64> {
    vec![1.0, 1.0, 0.0]
}

/// Two correlated active columns: the epoch Jacobian on the support is a
/// nontrivial 2x2 matrix.
pub fn toy_correlated_lasso() -> ProblemInstance {
    #[rustfmt::skip]
    let dense = [
        1.0, 0.8,
        0.2, 1.0,
        0.5, 0.4,
    ];
    let a = SparseColMatrix::from_dense(3, 2, &dense).expect("static toy");
    ProblemInstance::lasso(a, vec![2.0, 1.5, 0.6].into(), 0.05).expect("static toy")
}

/// Box-constrained SVM dual with `A = I`, `y = (+1, -1)`, `C = 10`.
pub fn toy_svm() -> ProblemInstance {
    let a = SparseColMatrix::from_dense(2, 2, &[1.0, 0.0, 0.0, 1.0]).expect("static toy");
    ProblemInstance::svm_dual(a, vec![1.0, -1.0].into(), 10.0).expect("static toy")
}
