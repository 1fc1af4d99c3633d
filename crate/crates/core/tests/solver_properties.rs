use cdident_core::solver::{identification_epoch, reference_solution, run_epoch};
use cdident_core::{solve, LossKind, Penalty, ProblemInstance, SolverConfig, SparseColMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(kind: LossKind, n: usize, p: usize, seed: u64, density: f64, lambda_frac: f64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense: Vec<f64> = (0..n * p)
        .map(|_| if rng.random_bool(density) { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    let a = SparseColMatrix::from_dense(n, p, &dense).unwrap();
    let y: Vec<f64> = match kind {
        LossKind::Quadratic => (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        _ => (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect(),
    };
    match kind {
        LossKind::Quadratic => {
            let lmax = a.transpose_matvec(&y).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs())) / n as f64;
            ProblemInstance::lasso(a, y.into(), lmax * lambda_frac).unwrap()
        }
        LossKind::Logistic => {
            let lmax = a.transpose_matvec(&y).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs())) / (2 * n) as f64;
            ProblemInstance::sparse_logreg(a, y.into(), lmax * lambda_frac).unwrap()
        }
        LossKind::SvmDual => ProblemInstance::svm_dual(a, y.into(), 0.5 + lambda_frac).unwrap(),
    }
}

fn any_kind() -> impl Strategy<Value = LossKind> {
    prop_oneof![Just(LossKind::Quadratic), Just(LossKind::Logistic), Just(LossKind::SvmDual)]
}

fn any_penalty_problem() -> impl Strategy<Value = ProblemInstance> {
    (any_kind(), any::<u64>(), 0.05f64..0.9, 5usize..25, 3usize..20, prop::bool::ANY).prop_map(
        |(kind, seed, frac, n, p, elastic)| {
            let prob = instance(kind, n, p, seed, 0.7, frac);
            match (kind, prob.penalty()) {
                (LossKind::Quadratic, Penalty::L1 { lambda }) if elastic => {
                    prob.with_penalty(Penalty::ElasticNet { lambda, lambda2: 0.3 })
                }
                _ => prob,
            }
        },
    )
}

/// Runs `epochs` epochs by hand from zero and hands each step to `check`.
fn for_each_epoch(prob: &ProblemInstance, epochs: usize, mut check: impl FnMut(&[f64], &[f64], &[f64], f64)) {
    let loss = prob.loss();
    let penalty = prob.penalty();
    let steps = loss.lipschitz_constants();
    let order: Vec<usize> = (0..prob.n_coords()).collect();
    let mut x = vec![0.0; prob.n_coords()];
    let mut state = loss.init_state(&x).unwrap();
    for _ in 0..epochs {
        let before = x.clone();
        let out = run_epoch(&loss, &penalty, &steps, &order, &mut x, &mut state);
        check(&before, &x, &out.witness, steps.global_lipschitz);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_never_increases(prob in any_penalty_problem()) {
        let trace = solve(&prob, &SolverConfig { max_epochs: 50, tol: 0.0, ..Default::default() }).unwrap();
        for w in trace.records.windows(2) {
            prop_assert!(w[1].objective <= w[0].objective + 1e-12, "{} -> {}", w[0].objective, w[1].objective);
        }
    }

    #[test]
    fn witness_is_a_subgradient(prob in any_penalty_problem()) {
        let loss = prob.loss();
        let penalty = prob.penalty();
        let mut failures = Vec::new();
        for_each_epoch(&prob, 30, |_, x, s, _| {
            let grad = loss.full_gradient(&loss.init_state(x).unwrap());
            for j in 0..x.len() {
                let interval = penalty.subdiff_interval(x[j]).unwrap();
                if !interval.contains(s[j] - grad[j], 1e-9) {
                    failures.push((j, x[j], s[j] - grad[j]));
                }
            }
        });
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }

    #[test]
    fn witness_obeys_chained_bound(prob in any_penalty_problem()) {
        let gamma = prob.loss().lipschitz_constants().gamma;
        let mut worst = f64::NEG_INFINITY;
        for_each_epoch(&prob, 30, |before, after, s, l| {
            let d: Vec<f64> = before.iter().zip(after).map(|(a, b)| a - b).collect();
            let weighted: f64 = d.iter().zip(gamma.iter())
                .filter(|(_, &g)| g > 0.0)
                .map(|(v, g)| v * v / g)
                .sum();
            let mut tail = 0.0;
            let mut chained = 0.0;
            for v in d.iter().rev() {
                tail += v * v;
                chained += tail;
            }
            // the bound assumes L_j > 0; frozen coordinates never move
            let lhs: f64 = s.iter().zip(gamma.iter()).filter(|(_, &g)| g > 0.0).map(|(v, _)| v * v).sum();
            worst = worst.max(lhs - (weighted + l * l * chained) - 1e-9);
        });
        prop_assert!(worst <= 0.0, "excess {worst}");
    }

    #[test]
    fn identification_persists(seed in any::<u64>(), logistic in prop::bool::ANY) {
        let kind = if logistic { LossKind::Logistic } else { LossKind::Quadratic };
        let prob = instance(kind, 30, 15, seed, 0.8, 0.3);
        let x_star = reference_solution(&prob, 1e-12).unwrap();
        let cfg = SolverConfig { store_snapshots: true, tol: 1e-12, max_epochs: 100_000, ..Default::default() };
        let trace = solve(&prob, &cfg).unwrap();
        let penalty = prob.penalty();
        if let Some(k) = identification_epoch(&trace, &x_star, &penalty) {
            let star_support: Vec<usize> = (0..x_star.len()).filter(|&j| x_star[j] != 0.0).collect();
            for rec in trace.records.iter().filter(|r| r.epoch >= k) {
                prop_assert!(rec.support.iter().all(|j| star_support.contains(j)));
                let x = rec.x_snapshot.as_ref().unwrap();
                for j in (0..x.len()).filter(|j| !star_support.contains(j)) {
                    prop_assert_eq!(x[j].to_bits(), x_star[j].to_bits());
                }
            }
        } else {
            prop_assert!(false, "never identified");
        }
    }
}

#[test]
fn reversed_order_reaches_the_same_point() {
    let tol = 1e-10;
    for seed in 0..20 {
        let prob = instance(LossKind::Quadratic, 100, 10, seed, 1.0, 0.2);
        let forward = solve(&prob, &SolverConfig { tol, ..Default::default() }).unwrap();
        let order: Vec<usize> = (0..10).rev().collect();
        let backward = solve(&prob, &SolverConfig { tol, order: Some(order), ..Default::default() }).unwrap();
        assert!(forward.converged && backward.converged);
        let gap = forward.final_x.distance(&backward.final_x);
        assert!(gap <= 10.0 * tol, "seed {seed}: gap {gap:e}");
    }
}

#[test]
fn step_scaling_still_converges() {
    let prob = instance(LossKind::Quadratic, 40, 20, 5, 0.8, 0.3);
    let full = reference_solution(&prob, 1e-12).unwrap();
    let half = solve(&prob, &SolverConfig { step_scale: 0.5, tol: 1e-11, max_epochs: 100_000, ..Default::default() }).unwrap();
    assert!(half.converged);
    assert!(half.final_x.distance(&full) < 1e-8);
}

#[test]
fn record_every_thins_the_trace() {
    let prob = instance(LossKind::Quadratic, 40, 20, 6, 0.8, 0.3);
    let trace = solve(&prob, &SolverConfig { max_epochs: 95, tol: 0.0, record_every: 10, ..Default::default() }).unwrap();
    let epochs: Vec<usize> = trace.records.iter().map(|r| r.epoch).collect();
    assert_eq!(epochs, [0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95]);
}
