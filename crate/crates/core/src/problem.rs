//! Composite problem description `f(x) + sum_j g_j(x_j)` and step sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SparseColMatrix};
use crate::losses::{LinearState, SmoothLoss};
use crate::penalties::Penalty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `||Ax - y||^2 / (2n)`
    Quadratic,
    /// `-(1/n) sum_i log sigma(y_i A_i x)`
    Logistic,
    /// `w^T (y.A)(y.A)^T w / 2 - sum_i w_i`, optimized over samples.
    SvmDual,
}

impl LossKind {
    pub fn is_classification(self) -> bool {
        matches!(self, Self::Logistic | Self::SvmDual)
    }
}

/// A fully specified composite problem.
///
/// The stored `design` matrix has one column per optimization coordinate.
/// For the quadratic and logistic losses it is the data matrix `A`; for the
/// SVM dual it is `(y . A)^T`, so samples become columns.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    design: SparseColMatrix,
    labels: DenseVector,
    loss_kind: LossKind,
    penalty: Penalty,
    n_samples: usize,
    n_features: usize,
}

impl ProblemInstance {
    pub fn new(
        matrix: SparseColMatrix,
        labels: DenseVector,
        loss_kind: LossKind,
        penalty: Penalty,
    ) -> Result<Self> {
        if labels.len() != matrix.n_rows() {
            return Err(Error::Dimension {
                expected: matrix.n_rows(),
                found: labels.len(),
            });
        }
        if !labels.is_finite() || !matrix.data().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite data".into()));
        }
        if loss_kind.is_classification() && labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidProblem(
                "classification labels must be -1 or +1".into(),
            ));
        }
        let (n_samples, n_features) = (matrix.n_rows(), matrix.n_cols());
        let design = match loss_kind {
            LossKind::SvmDual => matrix.scale_rows(&labels)?.transpose(),
            _ => matrix,
        };
        Ok(Self {
            design,
            labels,
            loss_kind,
            penalty,
            n_samples,
            n_features,
        })
    }

    pub fn lasso(matrix: SparseColMatrix, y: DenseVector, lambda: f64) -> Result<Self> {
        Self::new(matrix, y, LossKind::Quadratic, Penalty::l1(lambda)?)
    }

    pub fn sparse_logreg(matrix: SparseColMatrix, y: DenseVector, lambda: f64) -> Result<Self> {
        Self::new(matrix, y, LossKind::Logistic, Penalty::l1(lambda)?)
    }

    pub fn svm_dual(matrix: SparseColMatrix, y: DenseVector, c: f64) -> Result<Self> {
        Self::new(matrix, y, LossKind::SvmDual, Penalty::box_indicator(c)?)
    }

    pub fn loss(&self) -> SmoothLoss<'_> {
        SmoothLoss::new(self.loss_kind, &self.design, &self.labels)
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    pub fn with_penalty(&self, penalty: Penalty) -> Self {
        Self {
            penalty,
            ..self.clone()
        }
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss_kind
    }

    pub fn design(&self) -> &SparseColMatrix {
        &self.design
    }

    pub fn labels(&self) -> &DenseVector {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Number of optimization coordinates (features, or samples for the SVM dual).
    pub fn n_coords(&self) -> usize {
        self.design.n_cols()
    }

    /// `Phi(x) = f(x) + sum_j g_j(x_j)` with `state` consistent with `x`.
    pub fn objective(&self, state: &LinearState, x: &[f64]) -> f64 {
        let penalty = self.penalty;
        self.loss().value(state, x) + x.iter().map(|&v| penalty.value(v)).sum::<f64>()
    }

    /// Objective evaluated from scratch.
    pub fn objective_at(&self, x: &[f64]) -> Result<f64> {
        let state = self.loss().init_state(x)?;
        Ok(self.objective(&state, x))
    }
}

/// Per-coordinate step sizes `gamma_j` and Lipschitz constants `L_j`.
///
/// Coordinates with `L_j = 0` (empty columns) are frozen: `gamma_j` is stored
/// as 0 and the solver never updates them.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSizes {
    pub gamma: DenseVector,
    pub lipschitz: DenseVector,
    /// Upper bound on the Lipschitz constant of the full gradient.
    pub global_lipschitz: f64,
    pub frozen: Vec<usize>,
}

impl StepSizes {
    pub fn from_lipschitz(lipschitz: DenseVector, global_lipschitz: f64) -> Self {
        let mut frozen = Vec::new();
        let gamma = lipschitz
            .iter()
            .enumerate()
            .map(|(j, &l)| {
                if l > 0.0 {
                    1.0 / l
                } else {
                    frozen.push(j);
                    0.0
                }
            })
            .collect();
        Self {
            gamma,
            lipschitz,
            global_lipschitz,
            frozen,
        }
    }

    /// Multiplies every step by `factor`, which must lie in `(0, 1]`.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step scale must lie in (0, 1], got {factor}"
            )));
        }
        self.gamma.iter_mut().for_each(|g| *g *= factor);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn is_frozen(&self, j: usize) -> bool {
        self.gamma[j] == 0.0
    }
}

/// Maps arbitrary two-valued labels to `{-1, +1}`: the smaller distinct value
/// becomes -1. Labels already in `{-1, +1}` are returned unchanged.
pub fn remap_binary_labels(labels: &[f64]) -> Result<DenseVector> {
    let mut distinct: Vec<f64> = Vec::new();
    for &y in labels {
        if !distinct.contains(&y) {
            distinct.push(y);
            if distinct.len() > 2 {
                return Err(Error::InvalidProblem(
                    "more than two distinct labels for a binary task".into(),
                ));
            }
        }
    }
    distinct.sort_by(f64::total_cmp);
    if distinct.iter().all(|&y| y == 1.0 || y == -1.0) {
        return Ok(labels.into());
    }
    let low = distinct[0];
    Ok(labels.iter().map(|&y| if y == low { -1.0 } else { 1.0 }).collect())
}
