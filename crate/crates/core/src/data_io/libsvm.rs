//! Reader and writer for the libsvm / svmlight text format:
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ... [# comment]
//! ```
//!
//! Indices are 1-based and strictly ascending within a line.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SparseColMatrix};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a libsvm stream into a CSC matrix (one row per line) and labels.
///
/// The feature count is the largest index seen, or `n_features` when given;
/// an explicit count smaller than an observed index is an error.
pub fn parse_libsvm<R: BufRead>(reader: R, n_features: Option<usize>) -> Result<(SparseColMatrix, DenseVector)> {
    let mut labels = Vec::new();
    let mut triplets = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = content.split_whitespace();
        let Some(label) = tokens.next() else {
            continue;
        };
        let label: f64 = label
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid label {label:?}")))?;
        let row = labels.len();
        labels.push(label);
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based; found 0"));
            }
            if idx <= prev {
                return Err(parse_err(lineno, format!("index {idx} does not ascend after {prev}")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid value {val:?}")))?;
            prev = idx;
            max_index = max_index.max(idx);
            triplets.push((row, idx - 1, val));
        }
    }
    let n_cols = match n_features {
        Some(p) if p < max_index => {
            return Err(parse_err(
                0,
                format!("declared {p} features but index {max_index} was found"),
            ))
        }
        Some(p) => p,
        None => max_index,
    };
    let matrix = SparseColMatrix::from_triplets(labels.len(), n_cols, &triplets)?;
    Ok((matrix, labels.into()))
}

/// Writes one line per row. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_libsvm<W: Write>(mut out: W, matrix: &SparseColMatrix, labels: &[f64]) -> Result<()> {
    if labels.len() != matrix.n_rows() {
        return Err(Error::Dimension {
            expected: matrix.n_rows(),
            found: labels.len(),
        });
    }
    let rows = matrix.transpose();
    for (i, label) in labels.iter().enumerate() {
        write!(out, "{label:?}")?;
        let (cols, vals) = rows.col(i);
        for (&j, &v) in cols.iter().zip(vals) {
            write!(out, " {}:{v:?}", j + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
