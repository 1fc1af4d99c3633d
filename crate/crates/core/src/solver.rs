//! Cyclic proximal coordinate descent.
//!
//! One epoch updates every coordinate once, in a fixed order, each update
//! using the gradient at the current inner iterate:
//!
//! ```text
//! x_j <- prox_{gamma_j g_j}(x_j - gamma_j * grad_j f(x))
//! ```
//!
//! The epoch also produces an explicit element `s` of the subdifferential
//! of the objective at the new iterate,
//!
//! ```text
//! s_j = (x_j_old - x_j_new) / gamma_j - grad_j f(inner iterate) + grad_j f(x_new),
//! ```
//!
//! whose norm bounds `dist(0, dPhi(x_new))` and serves as the stopping rule.

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::losses::{LinearState, SmoothLoss};
use crate::penalties::Penalty;
use crate::problem::{ProblemInstance, StepSizes};

/// Epoch budget used by [`reference_solution`].
pub const REFERENCE_MAX_EPOCHS: usize = 200_000;
pub const DEFAULT_REFERENCE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_epochs: usize,
    /// Threshold on the subgradient-witness norm.
    pub tol: f64,
    pub record_every: usize,
    pub step_scale: f64,
    pub x0: Option<DenseVector>,
    /// Explicit cyclic order; ascending when `None`.
    pub order: Option<Vec<usize>>,
    /// Keep a copy of every recorded iterate.
    pub store_snapshots: bool,
    /// Known solution; when set, every record carries its distance to it.
    pub reference: Option<DenseVector>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_epochs: 10_000,
            tol: 1e-10,
            record_every: 1,
            step_scale: 1.0,
            x0: None,
            order: None,
            store_snapshots: false,
            reference: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, n_coords: usize) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be >= 0, got {}", self.tol)));
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_scale must lie in (0, 1], got {}",
                self.step_scale
            )));
        }
        for v in [&self.x0, &self.reference].into_iter().flatten() {
            if v.len() != n_coords {
                return Err(Error::Dimension {
                    expected: n_coords,
                    found: v.len(),
                });
            }
        }
        if let Some(order) = &self.order {
            let mut seen = vec![false; n_coords];
            if order.len() != n_coords {
                return Err(Error::InvalidConfig("order must be a permutation".into()));
            }
            for &j in order {
                if j >= n_coords || seen[j] {
                    return Err(Error::InvalidConfig("order must be a permutation".into()));
                }
                seen[j] = true;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
    pub witness_norm: f64,
    pub support: Vec<usize>,
    pub x_snapshot: Option<DenseVector>,
    pub dist_to_ref: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub records: Vec<EpochRecord>,
    pub final_x: DenseVector,
    pub converged: bool,
    pub epochs_run: usize,
    pub steps: StepSizes,
}

impl Trace {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

/// Output of one full cyclic pass.
#[derive(Clone, Debug)]
pub struct EpochOutput {
    /// Subgradient witness `s in dPhi(x_new)`.
    pub witness: DenseVector,
    /// `grad_j f` at the inner iterate just before coordinate `j` was updated.
    pub inner_gradients: DenseVector,
    /// `grad f(x_new)`.
    pub final_gradient: DenseVector,
}

/// Minimal-norm element of `grad_j f + dg_j(x_j)`.
fn min_norm_subgradient(penalty: &Penalty, xj: f64, grad: f64) -> Result<f64> {
    let interval = penalty.subdiff_interval(xj)?;
    Ok(grad + interval.project(-grad))
}

/// Runs one epoch in place and returns the subgradient witness.
///
/// `x` and `state` must be consistent on entry; they are consistent on exit.
/// Frozen coordinates (`gamma_j = 0`) are skipped and get the minimal-norm
/// subgradient as their witness entry.
pub fn run_epoch(
    loss: &SmoothLoss<'_>,
    penalty: &Penalty,
    steps: &StepSizes,
    order: &[usize],
    x: &mut [f64],
    state: &mut LinearState,
) -> EpochOutput {
    let p = x.len();
    let mut inner = vec![0.0; p];
    let mut moved = vec![0.0; p];
    for &j in order {
        let gamma = steps.gamma[j];
        let g = loss.grad_coord_unchecked(state, j);
        inner[j] = g;
        if gamma == 0.0 {
            continue;
        }
        let old = x[j];
        let new = penalty.prox(gamma, old - gamma * g);
        if new != old {
            loss.update_state_unchecked(state, j, new - old);
            x[j] = new;
        }
        moved[j] = (old - new) / gamma;
    }
    let final_gradient = loss.full_gradient(state);
    let witness = (0..p)
        .map(|j| {
            if steps.gamma[j] == 0.0 {
                // frozen coordinates start inside the domain and never move
                min_norm_subgradient(penalty, x[j], final_gradient[j]).unwrap_or(f64::INFINITY)
            } else {
                moved[j] - inner[j] + final_gradient[j]
            }
        })
        .collect();
    EpochOutput {
        witness,
        inner_gradients: inner.into(),
        final_gradient,
    }
}

/// Indices where the penalty is differentiable at `x`.
pub(crate) fn support_of(penalty: &Penalty, x: &[f64]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (j, &v) in x.iter().enumerate() {
        if penalty.is_differentiable_at(v)? {
            out.push(j);
        }
    }
    Ok(out)
}

/// Runs cyclic proximal coordinate descent until the witness norm drops to
/// `config.tol` or the epoch budget is spent.
///
/// Epoch 0 (the starting point) is always recorded, with the minimal-norm
/// subgradient as its witness.
pub fn solve(problem: &ProblemInstance, config: &SolverConfig) -> Result<Trace> {
    let p = problem.n_coords();
    config.validate(p)?;
    let loss = problem.loss();
    let penalty = problem.penalty();
    let steps = loss.lipschitz_constants().scaled(config.step_scale)?;
    let order: Vec<usize> = config.order.clone().unwrap_or_else(|| (0..p).collect());

    let mut x = config.x0.clone().unwrap_or_else(|| DenseVector::zeros(p));
    if let Some(&bad) = x.iter().find(|&&v| !penalty.in_domain(v)) {
        return Err(Error::Domain { value: bad });
    }
    let mut state = loss.init_state(&x)?;

    let make_record = |epoch: usize, x: &DenseVector, objective: f64, witness_norm: f64| -> Result<EpochRecord> {
        Ok(EpochRecord {
            epoch,
            objective,
            witness_norm,
            support: support_of(&penalty, x)?,
            x_snapshot: config.store_snapshots.then(|| x.clone()),
            dist_to_ref: config.reference.as_ref().map(|r| x.distance(r)),
        })
    };

    let grad0 = loss.full_gradient(&state);
    let mut w0 = 0.0;
    for j in 0..p {
        let s = min_norm_subgradient(&penalty, x[j], grad0[j])?;
        w0 += s * s;
    }
    let objective0 = problem.objective(&state, &x);
    if !objective0.is_finite() {
        return Err(Error::Divergence { epoch: 0 });
    }
    let mut records = vec![make_record(0, &x, objective0, w0.sqrt())?];

    let mut converged = false;
    let mut epochs_run = 0;
    for epoch in 1..=config.max_epochs {
        let out = run_epoch(&loss, &penalty, &steps, &order, &mut x, &mut state);
        epochs_run = epoch;
        let objective = problem.objective(&state, &x);
        if !objective.is_finite() || !x.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let witness_norm = out.witness.norm();
        converged = witness_norm <= config.tol;
        if converged || epoch % config.record_every == 0 || epoch == config.max_epochs {
            records.push(make_record(epoch, &x, objective, witness_norm)?);
        }
        if converged {
            break;
        }
    }

    Ok(Trace {
        records,
        final_x: x,
        converged,
        epochs_run,
        steps,
    })
}

/// High-accuracy solution used as `x*` for distances and the analysis.
///
/// Solves to witness norm `tol_ref`, then keeps sweeping until the iterate
/// stops changing in floating point or the witness stops improving, so that
/// `x*` is accurate well below `tol_ref`.
pub fn reference_solution(problem: &ProblemInstance, tol_ref: f64) -> Result<DenseVector> {
    reference_solution_from(problem, tol_ref, None, REFERENCE_MAX_EPOCHS)
}

pub fn reference_solution_from(
    problem: &ProblemInstance,
    tol_ref: f64,
    x0: Option<DenseVector>,
    max_epochs: usize,
) -> Result<DenseVector> {
    if !(tol_ref > 0.0) {
        return Err(Error::InvalidConfig(format!("tol_ref must be > 0, got {tol_ref}")));
    }
    let config = SolverConfig {
        max_epochs,
        tol: tol_ref,
        record_every: max_epochs,
        x0,
        ..SolverConfig::default()
    };
    let trace = solve(problem, &config)?;
    if !trace.converged {
        return Err(Error::NoReference {
            epochs: trace.epochs_run,
            witness_norm: trace.last().map_or(f64::NAN, |r| r.witness_norm),
        });
    }
    Ok(polish(problem, trace.final_x, &trace.steps, trace.epochs_run))
}

/// Extra sweeps past the stopping tolerance.
fn polish(problem: &ProblemInstance, mut x: DenseVector, steps: &StepSizes, budget: usize) -> DenseVector {
    let loss = problem.loss();
    let penalty = problem.penalty();
    let order: Vec<usize> = (0..x.len()).collect();
    let Ok(mut state) = loss.init_state(&x) else {
        return x;
    };
    let mut best = x.clone();
    let mut best_witness = f64::INFINITY;
    let mut stale = 0;
    for _ in 0..budget.max(100) {
        let before = x.clone();
        let witness = run_epoch(&loss, &penalty, steps, &order, &mut x, &mut state)
            .witness
            .norm();
        if witness < best_witness {
            best_witness = witness;
            best.copy_from_slice(&x);
            stale = 0;
        } else {
            stale += 1;
        }
        if *before == *x || witness == 0.0 || stale >= 50 {
            break;
        }
    }
    best
}

/// First recorded epoch from which every recorded iterate has the same
/// generalized support as `x_star` and agrees with it bitwise off that
/// support.
///
/// Uses snapshots when the trace has them. Without snapshots, agreement is
/// read from the recorded supports, which is exact for penalties whose
/// non-differentiable set is the single point 0 (l1, elastic net); for the
/// box indicator the two endpoints cannot be told apart and `None` is
/// returned.
pub fn identification_epoch(trace: &Trace, x_star: &[f64], penalty: &Penalty) -> Option<usize> {
    let star_support = support_of(penalty, x_star).ok()?;
    let mut in_support = vec![false; x_star.len()];
    for &j in &star_support {
        in_support[j] = true;
    }
    let agrees = |rec: &EpochRecord| -> Option<bool> {
        if rec.support != star_support {
            return Some(false);
        }
        if let Some(x) = &rec.x_snapshot {
            return Some(
                x.iter()
                    .zip(x_star)
                    .zip(&in_support)
                    .all(|((a, b), &s)| s || a.to_bits() == b.to_bits()),
            );
        }
        match penalty {
            Penalty::BoxIndicator { .. } => None,
            _ => Some(true),
        }
    };
    let mut first = None;
    for rec in &trace.records {
        if agrees(rec)? {
            first.get_or_insert(rec.epoch);
        } else {
            first = None;
        }
    }
    first
}
