//! Seeded synthetic regression and classification problems.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SparseColMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub nnz_true: usize,
    /// Pairwise correlation between columns, in `[0, 1)`.
    pub correlation: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 100,
            p: 200,
            nnz_true: 10,
            correlation: 0.5,
            noise_std: 0.1,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nnz_true > self.p {
            return Err(Error::InvalidConfig(format!(
                "nnz_true ({}) exceeds p ({})",
                self.nnz_true, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::InvalidConfig(format!(
                "correlation must lie in [0, 1), got {}",
                self.correlation
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidConfig("noise_std must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Regression,
    /// Labels are the signs of the regression targets (0 maps to +1).
    Classification,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticData {
    pub matrix: SparseColMatrix,
    pub labels: DenseVector,
    pub x_true: DenseVector,
}

/// Gaussian design where every column shares a latent factor, so that
/// columns have pairwise correlation `spec.correlation`:
/// `A_ij = sqrt(c) u_i + sqrt(1 - c) e_ij`.
pub fn generate_synthetic(spec: &SyntheticSpec, task: Task) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, p) = (spec.n, spec.p);
    let shared = spec.correlation.sqrt();
    let own = (1.0 - spec.correlation).sqrt();
    let latent: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();

    let mut col_ptr = Vec::with_capacity(p + 1);
    let mut row_idx = Vec::with_capacity(n * p);
    let mut data = Vec::with_capacity(n * p);
    col_ptr.push(0);
    for _ in 0..p {
        for (i, u) in latent.iter().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            row_idx.push(i);
            data.push(shared * u + own * e);
        }
        col_ptr.push(row_idx.len());
    }
    let matrix = SparseColMatrix::new(n, p, col_ptr, row_idx, data)?;

    let mut x_true = DenseVector::zeros(p);
    let mut positions = sample(&mut rng, p, spec.nnz_true).into_vec();
    positions.sort_unstable();
    for j in positions {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        x_true[j] = sign * rng.random_range(0.5..1.5);
    }

    let mut labels = matrix.matvec(&x_true)?;
    for y in labels.iter_mut() {
        let noise: f64 = rng.sample(StandardNormal);
        *y += spec.noise_std * noise;
    }
    if task == Task::Classification {
        labels.iter_mut().for_each(|y| *y = if *y >= 0.0 { 1.0 } else { -1.0 });
    }
    Ok(SyntheticData {
        matrix,
        labels: labels.into(),
        x_true,
    })
}
