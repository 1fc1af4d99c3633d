//! Experiment configuration: a JSON file whose fields can all be overridden
//! from the command line.
//!
//! ```json
//! {
//!   "dataset": "synthetic",
//!   "estimator": "lasso",
//!   "lambda_ratio": 5.0,
//!   "seed": 0,
//!   "solver": { "tol": 1e-10, "max_epochs": 10000 },
//!   "outputs": "runs/lasso",
//!   "plot": true
//! }
//! ```
//!
//! `dataset` is a built-in name (`toy-t1`, `toy-duplicated`,
//! `toy-correlated`, `toy-svm`, `synthetic`), a registry name (see
//! `cdident fetch`), a path to a libsvm file, or an inline
//! `{"synthetic": {...}}` generator spec.

use std::fs;
use std::path::{Path, PathBuf};

use cdident_core::data_io::SyntheticSpec;
use cdident_core::solver::DEFAULT_REFERENCE_TOL;
use cdident_core::{DenseVector, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_OUTPUTS: &str = "cdident-out";
pub const DEFAULT_RATE_WINDOW: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Lasso,
    Logreg,
    Svm,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Lasso => "lasso",
            Estimator::Logreg => "logreg",
            Estimator::Svm => "svm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    Name(String),
    Synthetic { synthetic: SyntheticSpec },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub max_epochs: Option<usize>,
    pub tol: Option<f64>,
    pub record_every: Option<usize>,
    pub step_scale: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub order: Option<Vec<usize>>,
    /// Witness tolerance for the reference solution.
    pub reference_tol: Option<f64>,
    /// Number of epochs used by the empirical rate estimate.
    pub rate_window: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<DatasetSource>,
    pub estimator: Option<Estimator>,
    /// `lambda = lambda_max / lambda_ratio`.
    pub lambda_ratio: Option<f64>,
    pub lambda_abs: Option<f64>,
    pub c_value: Option<f64>,
    #[serde(default)]
    pub solver: SolverSettings,
    pub seed: Option<u64>,
    pub outputs: Option<PathBuf>,
    #[serde(default)]
    pub plot: bool,
    /// Scale every design column to unit norm.
    #[serde(default)]
    pub normalize: bool,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON experiment configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for synthetic datasets
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stopping tolerance on the subgradient witness norm
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Built-in name, registry name, or libsvm file path
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
    /// Use lambda = lambda_max / RATIO
    #[arg(long)]
    pub lambda_ratio: Option<f64>,
    /// Absolute regularization strength
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Box bound for the SVM dual
    #[arg(long)]
    pub c: Option<f64>,
    /// Also write an SVG convergence plot
    #[arg(long)]
    pub plot: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Loads `overrides.config` if given, then applies every flag that was set.
    pub fn load(overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &overrides.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.outputs = Some(v.clone());
        }
        if let Some(v) = o.seed {
            self.seed = Some(v);
        }
        if let Some(v) = o.tol {
            self.solver.tol = Some(v);
        }
        if let Some(v) = o.max_epochs {
            self.solver.max_epochs = Some(v);
        }
        if let Some(v) = &o.dataset {
            self.dataset = Some(DatasetSource::Name(v.clone()));
        }
        if let Some(v) = o.estimator {
            self.estimator = Some(v);
        }
        // a regularization flag replaces whatever the file chose
        if o.lambda_ratio.is_some() || o.lambda.is_some() {
            self.lambda_ratio = o.lambda_ratio;
            self.lambda_abs = o.lambda;
        }
        if let Some(v) = o.c {
            self.c_value = Some(v);
        }
        if o.plot {
            self.plot = true;
        }
    }

    pub fn outputs(&self) -> PathBuf {
        self.outputs.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUTS))
    }

    pub fn reference_tol(&self) -> f64 {
        self.solver.reference_tol.unwrap_or(DEFAULT_REFERENCE_TOL)
    }

    pub fn rate_window(&self) -> usize {
        self.solver.rate_window.unwrap_or(DEFAULT_RATE_WINDOW)
    }

    pub fn solver_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        let s = &self.solver;
        SolverConfig {
            max_epochs: s.max_epochs.unwrap_or(d.max_epochs),
            tol: s.tol.unwrap_or(d.tol),
            record_every: s.record_every.unwrap_or(d.record_every),
            step_scale: s.step_scale.unwrap_or(d.step_scale),
            x0: s.x0.clone().map(DenseVector::from),
            order: s.order.clone(),
            ..d
        }
    }

    /// Checks the regularization fields against the estimator.
    ///
    /// `has_default` is true for built-in toys, which carry their own
    /// regularization and accept none being given.
    pub fn validate_regularization(&self, estimator: Estimator, has_default: bool) -> Result<(), CliError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::config(format!("{name} must be a positive number, got {x}"))),
            _ => Ok(()),
        };
        positive("lambda_ratio", self.lambda_ratio)?;
        positive("c_value", self.c_value)?;
        if let Some(l) = self.lambda_abs {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(CliError::config(format!("lambda must be >= 0, got {l}")));
            }
        }
        match estimator {
            Estimator::Lasso | Estimator::Logreg => {
                if self.c_value.is_some() {
                    return Err(CliError::config(format!("c_value does not apply to {}", estimator.name())));
                }
                match (self.lambda_ratio, self.lambda_abs) {
                    (Some(_), Some(_)) => Err(CliError::config("give exactly one of lambda_ratio and lambda_abs")),
                    (None, None) if !has_default => {
                        Err(CliError::config(format!("{} needs lambda_ratio or lambda_abs", estimator.name())))
                    }
                    _ => Ok(()),
                }
            }
            Estimator::Svm => {
                if self.lambda_ratio.is_some() || self.lambda_abs.is_some() {
                    return Err(CliError::config("svm takes c_value, not lambda"));
                }
                if self.c_value.is_none() && !has_default {
                    return Err(CliError::config("svm needs c_value"));
                }
                Ok(())
            }
        }
    }
}
