use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::SparseColMatrix;
use crate::penalties::Penalty;
use crate::problem::{LossKind, ProblemInstance};
use crate::solver::run_epoch;

/// Random instance with entries in [-1, 1] kept with probability `density`.
pub fn random_instance(kind: LossKind, n: usize, p: usize, seed: u64, density: f64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense: Vec<f64> = (0..n * p)
        .map(|_| {
            if rng.random_bool(density) {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    let a = SparseColMatrix::from_dense(n, p, &dense).unwrap();
    let y: Vec<f64> = match kind {
        LossKind::Quadratic => (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        _ => (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect(),
    };
    let penalty = match kind {
        LossKind::SvmDual => Penalty::BoxIndicator { c: 1.0 },
        _ => Penalty::L1 { lambda: 0.1 },
    };
    ProblemInstance::new(a, y.into(), kind, penalty).unwrap()
}

/// Central finite-difference Jacobian of one full epoch, restricted to
/// `support`, around `x_star`.
pub fn fd_epoch_jacobian(problem: &ProblemInstance, x_star: &[f64], support: &[usize], h: f64) -> nalgebra::DMatrix<f64> {
    let loss = problem.loss();
    let penalty = problem.penalty();
    let steps = loss.lipschitz_constants();
    let order: Vec<usize> = (0..x_star.len()).collect();
    let epoch = |x0: &[f64]| -> Vec<f64> {
        let mut x = x0.to_vec();
        let mut st = loss.init_state(&x).unwrap();
        run_epoch(&loss, &penalty, &steps, &order, &mut x, &mut st);
        x
    };
    let s = support.len();
    let mut jac = nalgebra::DMatrix::zeros(s, s);
    for (b, &jb) in support.iter().enumerate() {
        let mut xp = x_star.to_vec();
        xp[jb] += h;
        let mut xm = x_star.to_vec();
        xm[jb] -= h;
        let (fp, fm) = (epoch(&xp), epoch(&xm));
        for (a, &ja) in support.iter().enumerate() {
            jac[(a, b)] = (fp[ja] - fm[ja]) / (2.0 * h);
        }
    }
    jac
}
