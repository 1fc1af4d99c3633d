//! The `fit`, `analyze`, `plot` and `fetch` commands.

use std::fs;
use std::path::{Path, PathBuf};

use cdident_core::data_io;
use cdident_core::solver::{reference_solution_from, REFERENCE_MAX_EPOCHS};
use cdident_core::{solve, DenseVector, SolverConfig, Trace};

use crate::config::ExperimentConfig;
use crate::dataset::{self, ResolvedProblem};
use crate::error::CliError;
use crate::report::{self, RateSummary};
use crate::{plot, trace_csv};

pub const TRACE_FILE: &str = "trace.csv";
pub const RATE_FILE: &str = "rate.json";
pub const PLOT_FILE: &str = "convergence.svg";
pub const REFERENCE_FILE: &str = "x_star.json";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunArtifacts {
    pub trace_csv: PathBuf,
    pub rate_json: Option<PathBuf>,
    pub plot_svg: Option<PathBuf>,
}

/// A solved problem: reference solution plus a traced run with snapshots.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub resolved: ResolvedProblem,
    pub x_star: DenseVector,
    pub trace: Trace,
    pub solver: SolverConfig,
}

/// Resolves the problem, computes `x*` (unless given) and runs the traced
/// solve from the configured starting point.
pub fn run_experiment(cfg: &ExperimentConfig, x_star: Option<DenseVector>) -> Result<Experiment, CliError> {
    let resolved = dataset::resolve(cfg)?;
    let mut solver = cfg.solver_config();
    if solver.x0.is_none() {
        solver.x0 = resolved.x0.clone();
    }
    solver.validate(resolved.problem.n_coords())?;
    let x_star = match x_star {
        Some(x) if x.len() == resolved.problem.n_coords() => x,
        _ => reference_solution_from(
            &resolved.problem,
            cfg.reference_tol(),
            solver.x0.clone(),
            REFERENCE_MAX_EPOCHS,
        )?,
    };
    solver.store_snapshots = true;
    solver.reference = Some(x_star.clone());
    let trace = solve(&resolved.problem, &solver)?;
    Ok(Experiment {
        resolved,
        x_star,
        trace,
        solver,
    })
}

fn prepare_outputs(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let out = cfg.outputs();
    fs::create_dir_all(&out)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out.display())))?;
    Ok(out)
}

fn write_reference(path: &Path, x: &DenseVector) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string(x).expect("vector serializes") + "\n")?;
    Ok(())
}

fn read_reference(path: &Path) -> Option<DenseVector> {
    serde_json::from_str(&fs::read_to_string(path).ok()?).ok()
}

fn not_converged(exp: &Experiment) -> CliError {
    CliError::convergence(format!(
        "solver did not reach tol {:e} within {} epochs (artifacts written)",
        exp.solver.tol, exp.trace.epochs_run
    ))
}

/// Writes the trace CSV and the reference solution; with `plot` set also
/// runs the analysis and draws the figure.
pub fn cmd_fit(cfg: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    let out = prepare_outputs(cfg)?;
    let exp = run_experiment(cfg, None)?;
    let trace_path = out.join(TRACE_FILE);
    trace_csv::write(&trace_path, &trace_csv::rows(&exp.trace))?;
    write_reference(&out.join(REFERENCE_FILE), &exp.x_star)?;
    let mut artifacts = RunArtifacts {
        trace_csv: trace_path,
        rate_json: None,
        plot_svg: None,
    };
    if cfg.plot {
        let summary = report::summarize(&exp, cfg.rate_window())?;
        let rate_path = out.join(RATE_FILE);
        report::write(&rate_path, &summary)?;
        artifacts.plot_svg = Some(cmd_plot(&artifacts.trace_csv, &rate_path, &out.join(PLOT_FILE))?);
        artifacts.rate_json = Some(rate_path);
    }
    if !exp.trace.converged {
        return Err(not_converged(&exp));
    }
    Ok(artifacts)
}

/// Writes `rate.json` (and the trace CSV, and the plot when requested).
/// Reuses the reference solution saved by a previous `fit` when present.
pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<(RateSummary, RunArtifacts), CliError> {
    let out = prepare_outputs(cfg)?;
    let reference_path = out.join(REFERENCE_FILE);
    let exp = run_experiment(cfg, read_reference(&reference_path))?;
    write_reference(&reference_path, &exp.x_star)?;
    let trace_path = out.join(TRACE_FILE);
    trace_csv::write(&trace_path, &trace_csv::rows(&exp.trace))?;
    let summary = report::summarize(&exp, cfg.rate_window())?;
    let rate_path = out.join(RATE_FILE);
    report::write(&rate_path, &summary)?;
    let plot_svg = if cfg.plot {
        Some(cmd_plot(&trace_path, &rate_path, &out.join(PLOT_FILE))?)
    } else {
        None
    };
    if !exp.trace.converged {
        return Err(not_converged(&exp));
    }
    Ok((
        summary,
        RunArtifacts {
            trace_csv: trace_path,
            rate_json: Some(rate_path),
            plot_svg,
        },
    ))
}

pub fn cmd_plot(trace: &Path, rate: &Path, svg: &Path) -> Result<PathBuf, CliError> {
    let rows = trace_csv::read(trace)?;
    let summary = report::read(rate)?;
    fs::write(svg, plot::render_svg(&rows, &summary))?;
    Ok(svg.to_path_buf())
}

pub fn cmd_fetch(name: &str) -> Result<PathBuf, CliError> {
    let meta = data_io::lookup(name).ok_or_else(|| {
        CliError::config(format!("unknown dataset {name:?}\n{}", dataset::registry_listing()))
    })?;
    Ok(data_io::fetch_dataset(&meta, &dataset::cache_dir())?)
}
