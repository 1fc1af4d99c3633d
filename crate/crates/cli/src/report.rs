//! The `rate.json` summary written by `analyze`.

use std::fs;
use std::path::Path;

use cdident_core::analysis::{empirical_rate, rate_report};
use cdident_core::solver::identification_epoch;
use cdident_core::{Error as CoreError, Penalty};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::run::Experiment;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub dataset: String,
    pub estimator: String,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub n_coords: usize,
    pub converged: bool,
    pub epochs_run: usize,
    pub support_size: usize,
    pub support: Vec<usize>,
    /// First epoch from which the iterates carry the solution's model.
    pub k_star: Option<usize>,
    pub nondegeneracy_ok: bool,
    /// Smallest distance from `-grad_j f(x*)` to the boundary of the
    /// subdifferential over the off-support coordinates.
    pub nondegeneracy_margin: Option<f64>,
    pub injectivity_ok: bool,
    /// Smallest eigenvalue of the Hessian block on the support; `null` for
    /// an empty support.
    pub min_eig: Option<f64>,
    pub rho: Option<f64>,
    pub rho_gelfand: Option<f64>,
    pub a_norm: Option<f64>,
    pub empirical_rate: Option<f64>,
    pub rate_window: usize,
    /// `||x^(k*) - x*||`, the starting value of the predicted rate line.
    pub anchor_distance: Option<f64>,
    pub degenerate: bool,
    pub notes: Vec<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn summarize(exp: &Experiment, rate_window: usize) -> Result<RateSummary, CliError> {
    let problem = &exp.resolved.problem;
    let penalty = problem.penalty();
    let mut notes = Vec::new();
    let k_star = identification_epoch(&exp.trace, &exp.x_star, &penalty);
    if k_star.is_none() {
        notes.push("identification not observed within the trace".to_string());
    }
    let anchor_distance = k_star.and_then(|k| {
        exp.trace
            .records
            .iter()
            .find(|r| r.epoch == k)
            .and_then(|r| r.dist_to_ref)
    });

    let empirical = match empirical_rate(&exp.trace, &exp.x_star, rate_window) {
        Ok(r) => Some(r),
        Err(CoreError::InsufficientWindow { available, needed }) => {
            notes.push(format!(
                "empirical rate unavailable: {available} clean epochs, {needed} needed"
            ));
            None
        }
        Err(e) => return Err(e.into()),
    };

    let (lambda, c) = match penalty {
        Penalty::L1 { lambda } | Penalty::ElasticNet { lambda, .. } => (Some(lambda), None),
        Penalty::BoxIndicator { c } => (None, Some(c)),
    };
    let mut summary = RateSummary {
        dataset: exp.resolved.name.clone(),
        estimator: exp.resolved.estimator.name().to_string(),
        lambda,
        c,
        n_coords: problem.n_coords(),
        converged: exp.trace.converged,
        epochs_run: exp.trace.epochs_run,
        support_size: 0,
        support: Vec::new(),
        k_star,
        nondegeneracy_ok: false,
        nondegeneracy_margin: None,
        injectivity_ok: false,
        min_eig: None,
        rho: None,
        rho_gelfand: None,
        a_norm: None,
        empirical_rate: empirical,
        rate_window,
        anchor_distance,
        degenerate: true,
        notes,
    };

    match rate_report(problem, &exp.x_star, &exp.trace.steps) {
        Ok(report) => {
            summary.support = report.support.support.clone();
            summary.support_size = summary.support.len();
            summary.nondegeneracy_ok = report.nondegeneracy.ok;
            summary.nondegeneracy_margin = finite(report.nondegeneracy.margin);
            summary.injectivity_ok = report.injectivity.ok;
            summary.min_eig = finite(report.min_eig_hessian);
            summary.rho = Some(report.rho);
            summary.rho_gelfand = Some(report.rho_gelfand);
            summary.a_norm = report.a_norm;
            summary.degenerate = report.is_degenerate();
            if !report.nondegeneracy.ok {
                summary.notes.push("non-degeneracy fails at the reference solution".into());
            }
            if !report.injectivity.ok {
                summary.notes.push("Hessian block on the support is singular".into());
            }
            if report.rho >= 1.0 - cdident_core::analysis::DEGENERATE_RHO_GAP {
                summary.notes.push("spectral radius reaches 1: no local linear rate".into());
            }
        }
        Err(e) => summary.notes.push(format!("rate analysis failed: {e}")),
    }
    Ok(summary)
}

pub fn write(path: &Path, summary: &RateSummary) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read(path: &Path) -> Result<RateSummary, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
