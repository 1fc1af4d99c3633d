//! Trace CSV: `epoch,objective,witness_norm,support_size,dist_to_ref`, one
//! row per recorded epoch. Floats carry 17 significant digits; a missing
//! distance is an empty field.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cdident_core::Trace;

use crate::error::CliError;

pub const HEADER: &str = "epoch,objective,witness_norm,support_size,dist_to_ref";

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub objective: f64,
    pub witness_norm: f64,
    pub support_size: usize,
    pub dist_to_ref: Option<f64>,
}

pub fn rows(trace: &Trace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            epoch: r.epoch,
            objective: r.objective,
            witness_norm: r.witness_norm,
            support_size: r.support.len(),
            dist_to_ref: r.dist_to_ref,
        })
        .collect()
}

pub fn render(rows: &[TraceRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{:.16e},{:.16e},{},",
            r.epoch, r.objective, r.witness_norm, r.support_size
        );
        if let Some(d) = r.dist_to_ref {
            let _ = write!(out, "{d:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<Vec<TraceRow>, CliError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(CliError::config(format!("trace CSV must start with {HEADER:?}")));
    }
    let bad = |n: usize, what: &str| CliError::config(format!("trace CSV line {}: bad {what}", n + 2));
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(n, "field count"));
        }
        out.push(TraceRow {
            epoch: f[0].parse().map_err(|_| bad(n, "epoch"))?,
            objective: f[1].parse().map_err(|_| bad(n, "objective"))?,
            witness_norm: f[2].parse().map_err(|_| bad(n, "witness_norm"))?,
            support_size: f[3].parse().map_err(|_| bad(n, "support_size"))?,
            dist_to_ref: match f[4].trim() {
                "" => None,
                s => Some(s.parse().map_err(|_| bad(n, "dist_to_ref"))?),
            },
        });
    }
    Ok(out)
}

pub fn write(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    fs::write(path, render(rows))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Vec<TraceRow>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}
