//! Post-solve analysis: generalized support, assumption checks, the epoch
//! Jacobian restricted to the support, its spectral radius and the
//! predicted local rate.
//!
//! Around a solution `x*` with support `S`, one epoch acts on `x_S` as a
//! product of rank-one corrections of the identity,
//!
//! ```text
//! J = F_{j_s} ... F_{j_1},   F_j = I - e_j e_j^T + d_j (e_j e_j^T - gamma_j e_j H_{j,S}),
//! ```
//!
//! with `H = nabla^2_{S,S} f(x*)` and `d_j` the prox derivative at
//! `z*_j = x*_j - gamma_j grad_j f(x*)`. With `M = H + diag(u)` and
//! `u_j = 1/(gamma_j d_j) - 1/gamma_j`, the same product is similar to
//! `A = (I - B_{j_s}) ... (I - B_{j_1})`, `B_j = gamma_j d_j M^{1/2} e_j e_j^T M^{1/2}`,
//! which has spectral norm below one when `M` is positive definite.

use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::losses::SmoothLoss;
use crate::penalties::Penalty;
use crate::problem::{ProblemInstance, StepSizes};
use crate::solver::{support_of, Trace};

/// Stationarity tolerance on the support used by [`check_nondegeneracy`].
pub const DEFAULT_STATIONARITY_TOL: f64 = 1e-8;
/// Positive-definiteness threshold for the restricted Hessian.
pub const DEFAULT_PD_TOL: f64 = 1e-10;
/// Eigenvalue floor below which `M^{1/2}` is refused.
pub const SQRT_EIGEN_FLOOR: f64 = 1e-12;
/// Spectral radii at or above `1 - DEGENERATE_RHO_GAP` are flagged.
pub const DEGENERATE_RHO_GAP: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SupportInfo {
    pub support: Vec<usize>,
    /// `z*_j = x*_j - gamma_j grad_j f(x*)` for every coordinate.
    pub z_star: DenseVector,
    /// Prox derivatives at `z*_j`, one per support entry.
    pub prox_derivs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NondegeneracyReport {
    pub ok: bool,
    /// Smallest distance of `-grad_j f(x*)` to the boundary of the
    /// subdifferential over the complement of the support (`+inf` if empty).
    pub margin: f64,
    /// Largest `|grad_j f + g_j'(x*_j)|` over the support.
    pub stationarity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InjectivityReport {
    pub ok: bool,
    pub min_eig: f64,
}

#[derive(Clone, Debug)]
pub struct SimilarityForm {
    pub m_sqrt: DMatrix<f64>,
    /// Rank-one factors `B_j` in support order.
    pub b_matrices: Vec<DMatrix<f64>>,
    pub a_matrix: DMatrix<f64>,
    pub a_norm: f64,
}

#[derive(Clone, Debug)]
pub struct RateReport {
    pub support: SupportInfo,
    pub m: DMatrix<f64>,
    pub jacobian: DMatrix<f64>,
    pub rho: f64,
    pub rho_gelfand: f64,
    /// `||A||_2`, absent when `M` is not positive definite.
    pub a_norm: Option<f64>,
    pub min_eig_hessian: f64,
    pub nondegeneracy: NondegeneracyReport,
    pub injectivity: InjectivityReport,
}

impl RateReport {
    /// Whether the local rate theory does not apply to this instance.
    pub fn is_degenerate(&self) -> bool {
        self.rho >= 1.0 - DEGENERATE_RHO_GAP || !self.injectivity.ok || !self.nondegeneracy.ok
    }
}

/// `{ j : g_j differentiable at x_j }`.
pub fn generalized_support(x: &[f64], penalty: &Penalty) -> Result<Vec<usize>> {
    support_of(penalty, x)
}

fn gradient_at(loss: &SmoothLoss<'_>, x: &[f64]) -> Result<DenseVector> {
    Ok(loss.full_gradient(&loss.init_state(x)?))
}

pub fn check_nondegeneracy(
    x_star: &[f64],
    loss: &SmoothLoss<'_>,
    penalty: &Penalty,
    tol: f64,
) -> NondegeneracyReport {
    let failed = NondegeneracyReport {
        ok: false,
        margin: f64::NEG_INFINITY,
        stationarity: f64::INFINITY,
    };
    let Ok(grad) = gradient_at(loss, x_star) else {
        return failed;
    };
    let mut margin = f64::INFINITY;
    let mut stationarity = 0.0f64;
    for (j, &xj) in x_star.iter().enumerate() {
        let Ok(interval) = penalty.subdiff_interval(xj) else {
            return failed;
        };
        if interval.is_singleton() {
            stationarity = stationarity.max((grad[j] + interval.lo).abs());
        } else {
            margin = margin.min(interval.interior_margin(-grad[j]));
        }
    }
    NondegeneracyReport {
        ok: margin > 0.0 && stationarity <= tol,
        margin,
        stationarity,
    }
}

fn symmetric_min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

pub fn check_restricted_injectivity(
    x_star: &[f64],
    loss: &SmoothLoss<'_>,
    support: &[usize],
) -> Result<InjectivityReport> {
    if support.is_empty() {
        return Ok(InjectivityReport {
            ok: true,
            min_eig: f64::INFINITY,
        });
    }
    let h = loss.hessian_block(x_star, support, support)?;
    let min_eig = symmetric_min_eig(&h);
    Ok(InjectivityReport {
        ok: min_eig > DEFAULT_PD_TOL,
        min_eig,
    })
}

/// `z*` for all coordinates and prox derivatives on `support`.
pub fn support_info(
    x_star: &[f64],
    loss: &SmoothLoss<'_>,
    penalty: &Penalty,
    steps: &StepSizes,
    support: &[usize],
) -> Result<SupportInfo> {
    let grad = gradient_at(loss, x_star)?;
    let z_star: DenseVector = x_star
        .iter()
        .zip(grad.iter())
        .zip(steps.gamma.iter())
        .map(|((x, g), gamma)| x - gamma * g)
        .collect();
    let mut prox_derivs = Vec::with_capacity(support.len());
    for &j in support {
        if j >= x_star.len() {
            return Err(Error::Index {
                index: j,
                len: x_star.len(),
            });
        }
        let gamma = steps.gamma[j];
        let d = penalty.prox_derivative(gamma, z_star[j])?;
        if gamma == 0.0 || d == 0.0 {
            // a support coordinate sitting in a flat region of the prox
            return Err(Error::NonDifferentiable { value: z_star[j] });
        }
        prox_derivs.push(d);
    }
    Ok(SupportInfo {
        support: support.to_vec(),
        z_star,
        prox_derivs,
    })
}

fn m_from_info(
    x_star: &[f64],
    loss: &SmoothLoss<'_>,
    steps: &StepSizes,
    info: &SupportInfo,
) -> Result<DMatrix<f64>> {
    let mut m = loss.hessian_block(x_star, &info.support, &info.support)?;
    for (a, (&j, &d)) in info.support.iter().zip(&info.prox_derivs).enumerate() {
        let gamma = steps.gamma[j];
        m[(a, a)] += 1.0 / (gamma * d) - 1.0 / gamma;
    }
    Ok(m)
}

/// `M = nabla^2_{S,S} f(x*) + diag(u)`.
pub fn build_m(
    x_star: &[f64],
    loss: &SmoothLoss<'_>,
    penalty: &Penalty,
    steps: &StepSizes,
    support: &[usize],
) -> Result<DMatrix<f64>> {
    let info = support_info(x_star, loss, penalty, steps, support)?;
    m_from_info(x_star, loss, steps, &info)
}

fn jacobian_from_info(
    x_star: &[f64],
    loss: &SmoothLoss<'_>,
    steps: &StepSizes,
    info: &SupportInfo,
) -> Result<DMatrix<f64>> {
    let s = info.support.len();
    let h = loss.hessian_block(x_star, &info.support, &info.support)?;
    let mut jac = DMatrix::<f64>::identity(s, s);
    // Left-multiplying by F_j only rewrites row j.
    for (a, (&j, &d)) in info.support.iter().zip(&info.prox_derivs).enumerate() {
        let gamma = steps.gamma[j];
        let hj = h.row(a) * &jac;
        let new_row = (jac.row(a) - hj * gamma) * d;
        jac.set_row(a, &new_row);
    }
    Ok(jac)
}

/// Jacobian of one epoch restricted to the support, at `x*`.
pub fn epoch_jacobian(
    x_star: &[f64],
    loss: &SmoothLoss<'_>,
    penalty: &Penalty,
    steps: &StepSizes,
    support: &[usize],
) -> Result<DMatrix<f64>> {
    let info = support_info(x_star, loss, penalty, steps, support)?;
    jacobian_from_info(x_star, loss, steps, &info)
}

/// Symmetric square root of a positive definite matrix.
pub fn sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_eig = eig.eigenvalues.min();
    if !(min_eig > SQRT_EIGEN_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose())
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// The similarity form `A = M^{1/2} J M^{-1/2}` assembled from the `B_j`.
pub fn similarity_form(
    m: &DMatrix<f64>,
    steps: &StepSizes,
    support: &[usize],
    prox_derivs: &[f64],
) -> Result<SimilarityForm> {
    let s = support.len();
    if m.nrows() != s || m.ncols() != s || prox_derivs.len() != s {
        return Err(Error::Dimension {
            expected: s,
            found: m.nrows(),
        });
    }
    if s == 0 {
        return Ok(SimilarityForm {
            m_sqrt: DMatrix::zeros(0, 0),
            b_matrices: Vec::new(),
            a_matrix: DMatrix::zeros(0, 0),
            a_norm: 0.0,
        });
    }
    let m_sqrt = sqrt_spd(m)?;
    let mut a_matrix = DMatrix::<f64>::identity(s, s);
    let mut b_matrices = Vec::with_capacity(s);
    for (a, (&j, &d)) in support.iter().zip(prox_derivs).enumerate() {
        let col = m_sqrt.column(a);
        let b = (col * col.transpose()) * (steps.gamma[j] * d);
        a_matrix = (DMatrix::identity(s, s) - &b) * a_matrix;
        b_matrices.push(b);
    }
    let a_norm = spectral_norm(&a_matrix);
    Ok(SimilarityForm {
        m_sqrt,
        b_matrices,
        a_matrix,
        a_norm,
    })
}

/// Eigenvalues sorted by modulus, then by angle.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or_else(|| Error::Eigen {
        gelfand: gelfand_spectral_radius(m),
    })?;
    let mut eigs: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen {
            gelfand: gelfand_spectral_radius(m),
        });
    }
    eigs.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    Ok(eigs)
}

/// Largest eigenvalue modulus, from a dense real Schur decomposition.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Gelfand estimate `||m^(2^k)||_2^(1/2^k)` by repeated squaring, stopped
/// when the relative change drops below `1e-4`.
pub fn gelfand_spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let norm0 = spectral_norm(m);
    if norm0 == 0.0 || !norm0.is_finite() {
        return if norm0 == 0.0 { 0.0 } else { f64::NAN };
    }
    // m^(2^k) = exp(log_scale) * power, with power kept at unit norm
    let mut power = m / norm0;
    let mut log_scale = norm0.ln();
    let mut exponent = 1.0f64;
    let mut estimate = norm0;
    for _ in 0..60 {
        let squared = &power * &power;
        let n = spectral_norm(&squared);
        if n == 0.0 {
            return 0.0;
        }
        power = squared / n;
        log_scale = 2.0 * log_scale + n.ln();
        exponent *= 2.0;
        let next = (log_scale / exponent).exp();
        let change = (next - estimate).abs() / next.max(f64::MIN_POSITIVE);
        estimate = next;
        if change < 1e-4 {
            break;
        }
    }
    estimate
}

fn record_distance(rec: &crate::solver::EpochRecord, x_star: &[f64]) -> Option<f64> {
    rec.x_snapshot
        .as_ref()
        .map(|x| x.distance(x_star))
        .or(rec.dist_to_ref)
}

/// `h(k) = ||x^(k*) - x*|| * rho^(k - k*)` at every recorded epoch `k >= k*`.
pub fn predicted_rate_line(trace: &Trace, k_star: usize, x_star: &[f64], rho: f64) -> Result<Vec<(usize, f64)>> {
    let anchor = trace
        .records
        .iter()
        .find(|r| r.epoch == k_star)
        .ok_or_else(|| Error::InvalidConfig(format!("epoch {k_star} is not recorded in the trace")))?;
    let d0 = record_distance(anchor, x_star).ok_or(Error::MissingSnapshots)?;
    Ok(trace
        .records
        .iter()
        .filter(|r| r.epoch >= k_star)
        .map(|r| (r.epoch, d0 * rho.powi((r.epoch - k_star) as i32)))
        .collect())
}

/// Geometric mean of consecutive distance ratios over the last `window`
/// epochs whose distance to `x*` is above `100 * eps * ||x*||`.
pub fn empirical_rate(trace: &Trace, x_star: &[f64], window: usize) -> Result<f64> {
    if window == 0 {
        return Err(Error::InvalidConfig("window must be >= 1".into()));
    }
    let star_norm = x_star.iter().map(|v| v * v).sum::<f64>().sqrt();
    let floor = 1e2 * f64::EPSILON * star_norm;
    let mut clean = Vec::new();
    for rec in &trace.records {
        let d = record_distance(rec, x_star).ok_or(Error::MissingSnapshots)?;
        if d > floor && d > 0.0 {
            clean.push((rec.epoch, d));
        }
    }
    // trailing run of consecutive epochs
    let mut run = usize::from(!clean.is_empty());
    while run < clean.len() && clean[clean.len() - run].0 == clean[clean.len() - run - 1].0 + 1 {
        run += 1;
    }
    if run < window + 1 {
        return Err(Error::InsufficientWindow {
            available: run.saturating_sub(1),
            needed: window,
        });
    }
    let last = clean[clean.len() - 1].1;
    let first = clean[clean.len() - 1 - window].1;
    Ok((last / first).powf(1.0 / window as f64))
}

/// Full analysis at a reference solution. Degenerate instances are reported
/// through the flags on [`RateReport`], not as errors.
pub fn rate_report(problem: &ProblemInstance, x_star: &[f64], steps: &StepSizes) -> Result<RateReport> {
    let loss = problem.loss();
    let penalty = problem.penalty();
    let support = generalized_support(x_star, &penalty)?;
    let nondegeneracy = check_nondegeneracy(x_star, &loss, &penalty, DEFAULT_STATIONARITY_TOL);
    let injectivity = check_restricted_injectivity(x_star, &loss, &support)?;
    let info = support_info(x_star, &loss, &penalty, steps, &support)?;
    let m = m_from_info(x_star, &loss, steps, &info)?;
    let jacobian = jacobian_from_info(x_star, &loss, steps, &info)?;
    let rho_gelfand = gelfand_spectral_radius(&jacobian);
    let rho = match spectral_radius(&jacobian) {
        Ok(r) => r,
        Err(Error::Eigen { gelfand }) => gelfand,
        Err(e) => return Err(e),
    };
    let a_norm = similarity_form(&m, steps, &info.support, &info.prox_derivs)
        .ok()
        .map(|f| f.a_norm);
    Ok(RateReport {
        support: info,
        m,
        jacobian,
        rho,
        rho_gelfand,
        a_norm,
        min_eig_hessian: injectivity.min_eig,
        nondegeneracy,
        injectivity,
    })
}
