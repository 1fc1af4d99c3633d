//! Turns the `dataset` / estimator / regularization fields of a config into a
//! problem instance.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use cdident_core::data_io::{self, SyntheticSpec, Task};
use cdident_core::problem::remap_binary_labels;
use cdident_core::toys;
use cdident_core::{DenseVector, LossKind, Penalty, ProblemInstance, SmoothLoss, SparseColMatrix};

use crate::config::{DatasetSource, Estimator, ExperimentConfig};
use crate::error::CliError;

pub const BUILTINS: [&str; 5] = ["toy-t1", "toy-duplicated", "toy-correlated", "toy-svm", "synthetic"];
pub const CACHE_ENV: &str = "CDIDENT_CACHE";

#[derive(Clone, Debug)]
pub struct ResolvedProblem {
    pub problem: ProblemInstance,
    pub estimator: Estimator,
    /// Starting point suggested by the dataset (used when the config has none).
    pub x0: Option<DenseVector>,
    pub name: String,
}

/// `$CDIDENT_CACHE`, else `$HOME/.cache/cdident`, else `.cdident-cache`.
pub fn cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    match std::env::var_os("HOME") {
        Some(home) => Path::new(&home).join(".cache").join("cdident"),
        None => PathBuf::from(".cdident-cache"),
    }
}

pub fn registry_listing() -> String {
    let mut out = String::from("built-in datasets:\n");
    for name in BUILTINS {
        out.push_str(&format!("  {name}\n"));
    }
    out.push_str("registry datasets:\n");
    for m in data_io::registry() {
        out.push_str(&format!(
            "  {:<10} {:>6} x {:<7} density {}\n",
            m.name, m.n_samples, m.n_features, m.density
        ));
    }
    out
}

fn kind_of(estimator: Estimator) -> LossKind {
    match estimator {
        Estimator::Lasso => LossKind::Quadratic,
        Estimator::Logreg => LossKind::Logistic,
        Estimator::Svm => LossKind::SvmDual,
    }
}

fn toy(name: &str) -> Option<(ProblemInstance, Estimator, Option<DenseVector>)> {
    Some(match name {
        "toy-t1" => (toys::toy_t1(), Estimator::Lasso, None),
        "toy-duplicated" => (
            toys::toy_duplicated_columns(),
            Estimator::Lasso,
            Some(toys::toy_duplicated_x0().into()),
        ),
        "toy-correlated" => (toys::toy_correlated_lasso(), Estimator::Lasso, None),
        "toy-svm" => (toys::toy_svm(), Estimator::Svm, None),
        _ => return None,
    })
}

fn penalty_for(
    cfg: &ExperimentConfig,
    estimator: Estimator,
    lambda_max: impl FnOnce() -> cdident_core::Result<f64>,
) -> Result<Option<Penalty>, CliError> {
    Ok(match estimator {
        Estimator::Lasso | Estimator::Logreg => match (cfg.lambda_ratio, cfg.lambda_abs) {
            (Some(ratio), None) => Some(Penalty::L1 {
                lambda: lambda_max()? / ratio,
            }),
            (None, Some(lambda)) => Some(Penalty::L1 { lambda }),
            _ => None,
        },
        Estimator::Svm => cfg.c_value.map(|c| Penalty::BoxIndicator { c }),
    })
}

pub fn resolve(cfg: &ExperimentConfig) -> Result<ResolvedProblem, CliError> {
    let source = cfg
        .dataset
        .clone()
        .ok_or_else(|| CliError::config(format!("no dataset given\n{}", registry_listing())))?;

    if let DatasetSource::Name(name) = &source {
        if let Some((problem, toy_estimator, x0)) = toy(name) {
            let estimator = cfg.estimator.unwrap_or(toy_estimator);
            if estimator != toy_estimator {
                return Err(CliError::config(format!(
                    "{name} is a {} problem, not {}",
                    toy_estimator.name(),
                    estimator.name()
                )));
            }
            cfg.validate_regularization(estimator, true)?;
            let problem = match penalty_for(cfg, estimator, || problem.loss().lambda_max())? {
                Some(pen) => problem.with_penalty(pen),
                None => problem,
            };
            return Ok(ResolvedProblem {
                problem,
                estimator,
                x0,
                name: name.clone(),
            });
        }
    }

    let estimator = cfg
        .estimator
        .ok_or_else(|| CliError::config("estimator is required (lasso, logreg or svm)"))?;
    cfg.validate_regularization(estimator, false)?;
    let task = match estimator {
        Estimator::Lasso => Task::Regression,
        _ => Task::Classification,
    };
    let (name, mut matrix, labels) = match source {
        DatasetSource::Synthetic { mut synthetic } => {
            if let Some(seed) = cfg.seed {
                synthetic.seed = seed;
            }
            let d = data_io::generate_synthetic(&synthetic, task)?;
            ("synthetic".to_string(), d.matrix, d.labels)
        }
        DatasetSource::Name(name) if name == "synthetic" => {
            let spec = SyntheticSpec {
                seed: cfg.seed.unwrap_or(0),
                ..SyntheticSpec::default()
            };
            let d = data_io::generate_synthetic(&spec, task)?;
            (name, d.matrix, d.labels)
        }
        DatasetSource::Name(name) => {
            if let Some(meta) = data_io::lookup(&name) {
                let path = data_io::fetch_dataset(&meta, &cache_dir())?;
                let (m, y) = data_io::load_dataset(&meta, &path)?;
                (name, m, y)
            } else if Path::new(&name).is_file() {
                let file = File::open(&name)?;
                let (m, y) = data_io::parse_libsvm(BufReader::new(file), None)?;
                (name, m, y)
            } else {
                return Err(CliError::config(format!(
                    "unknown dataset {name:?}\n{}",
                    registry_listing()
                )));
            }
        }
    };
    if cfg.normalize {
        matrix.normalize_columns();
    }
    let problem = assemble(matrix, labels, estimator, cfg)?;
    Ok(ResolvedProblem {
        problem,
        estimator,
        x0: None,
        name,
    })
}

fn assemble(
    matrix: SparseColMatrix,
    labels: DenseVector,
    estimator: Estimator,
    cfg: &ExperimentConfig,
) -> Result<ProblemInstance, CliError> {
    let kind = kind_of(estimator);
    let labels = if kind.is_classification() {
        remap_binary_labels(&labels)?
    } else {
        labels
    };
    let penalty = {
        let loss = SmoothLoss::new(kind, &matrix, &labels);
        penalty_for(cfg, estimator, || loss.lambda_max())?
            .expect("regularization validated before assembly")
    };
    Ok(ProblemInstance::new(matrix, labels, kind, penalty)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn toy_defaults() {
        let r = resolve(&cfg(r#"{"dataset": "toy-t1"}"#)).unwrap();
        assert_eq!(r.estimator, Estimator::Lasso);
        assert_eq!(r.problem.penalty(), Penalty::L1 { lambda: 1.0 });
        let r = resolve(&cfg(r#"{"dataset": "toy-duplicated"}"#)).unwrap();
        assert_eq!(r.x0.unwrap().as_slice(), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn toy_with_ratio() {
        // lambda_max of T1 is |A^T y|_inf / n = 1.5
        let r = resolve(&cfg(r#"{"dataset": "toy-t1", "lambda_ratio": 3.0}"#)).unwrap();
        assert_eq!(r.problem.penalty(), Penalty::L1 { lambda: 0.5 });
    }

    #[test]
    fn toy_estimator_mismatch() {
        assert!(resolve(&cfg(r#"{"dataset": "toy-t1", "estimator": "svm", "c_value": 1.0}"#)).is_err());
    }

    #[test]
    fn synthetic_classification_labels() {
        let r = resolve(&cfg(r#"{"dataset": "synthetic", "estimator": "logreg", "lambda_ratio": 5.0, "seed": 4}"#)).unwrap();
        assert!(r.problem.labels().iter().all(|&y| y.abs() == 1.0));
        assert_eq!(r.problem.n_coords(), 200);
        let r = resolve(&cfg(r#"{"dataset": "synthetic", "estimator": "svm", "c_value": 1.0}"#)).unwrap();
        assert_eq!(r.problem.n_coords(), 100);
    }

    #[test]
    fn svm_without_c_is_config_error() {
        let err = resolve(&cfg(r#"{"dataset": "synthetic", "estimator": "svm"}"#)).unwrap_err();
        assert_eq!(err.status, crate::error::ExitStatus::Config);
    }

    #[test]
    fn unknown_name_lists_registry() {
        let err = resolve(&cfg(r#"{"dataset": "no-such-data", "estimator": "lasso", "lambda_ratio": 2}"#)).unwrap_err();
        assert_eq!(err.status, crate::error::ExitStatus::Config);
        assert!(err.msg.contains("leukemia") && err.msg.contains("toy-t1"));
    }

    #[test]
    fn libsvm_file_with_remapped_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        std::fs::write(&path, "0 1:1 2:0.5\n1 1:-1 2:2\n0 2:1\n").unwrap();
        let json = format!(
            r#"{{"dataset": {:?}, "estimator": "logreg", "lambda_ratio": 2}}"#,
            path.to_str().unwrap()
        );
        let r = resolve(&cfg(&json)).unwrap();
        assert_eq!(r.problem.labels().as_slice(), &[-1.0, 1.0, -1.0]);
    }
}
