//! Dense vectors, compressed sparse column matrices and the weighted norm.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Owned vector of `f64` used for iterates, labels, gradients and caches.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance to `other`. Panics on length mismatch.
    pub fn distance(&self, other: &[f64]) -> f64 {
        assert_eq!(self.len(), other.len(), "distance: length mismatch");
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for DenseVector {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `sqrt(sum_j w_j x_j^2)`. With `w == 1` this is the Euclidean norm.
///
/// Callers pass the step sizes for `||.||_gamma` or their inverses for
/// `||.||_{gamma^-1}`.
pub fn weighted_norm(x: &[f64], w: &[f64]) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: w.len(),
        });
    }
    Ok(x.iter()
        .zip(w)
        .map(|(xi, wi)| wi * xi * xi)
        .sum::<f64>()
        .sqrt())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sparse matrix in compressed sparse column layout.
///
/// Row indices are strictly increasing inside each column; explicit zeros
/// are allowed and preserved.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseColMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    data: Vec<f64>,
}

impl SparseColMatrix {
    /// Builds a matrix from raw CSC arrays, validating the layout.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != n_cols + 1 {
            return Err(Error::Structure(format!(
                "col_ptr has length {}, expected {}",
                col_ptr.len(),
                n_cols + 1
            )));
        }
        if col_ptr[0] != 0 || col_ptr[n_cols] != row_idx.len() || row_idx.len() != data.len() {
            return Err(Error::Structure(
                "col_ptr endpoints disagree with entry arrays".into(),
            ));
        }
        for j in 0..n_cols {
            let (start, end) = (col_ptr[j], col_ptr[j + 1]);
            if start > end {
                return Err(Error::Structure(format!("col_ptr decreases at column {j}")));
            }
            let rows = &row_idx[start..end];
            if rows.iter().any(|&i| i >= n_rows) {
                return Err(Error::Structure(format!("row index out of range in column {j}")));
            }
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structure(format!(
                    "row indices not strictly increasing in column {j}"
                )));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            data,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n_cols + 1];
        for &(i, j, _) in triplets {
            if i >= n_rows {
                return Err(Error::Index { index: i, len: n_rows });
            }
            if j >= n_cols {
                return Err(Error::Index { index: j, len: n_cols });
            }
            counts[j + 1] += 1;
        }
        for j in 0..n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[j]] = (i, v);
            next[j] += 1;
        }

        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        for j in 0..n_cols {
            let col = &mut entries[counts[j]..counts[j + 1]];
            col.sort_by_key(|&(i, _)| i);
            for &(i, v) in col.iter() {
                if row_idx.len() > col_ptr[j] && *row_idx.last().unwrap() == i {
                    *data.last_mut().unwrap() += v;
                } else {
                    row_idx.push(i);
                    data.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            data,
        })
    }

    /// Builds a matrix from row-major dense data, dropping exact zeros.
    pub fn from_dense(n_rows: usize, n_cols: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n_rows * n_cols {
            return Err(Error::Dimension {
                expected: n_rows * n_cols,
                found: row_major.len(),
            });
        }
        let mut triplets = Vec::new();
        for i in 0..n_rows {
            for j in 0..n_cols {
                let v = row_major[i * n_cols + j];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Stored entries per cell, `nnz / (n_rows * n_cols)`; 0 for an empty shape.
    pub fn density(&self) -> f64 {
        let cells = self.n_rows * self.n_cols;
        if cells == 0 {
            0.0
        } else {
            self.nnz() as f64 / cells as f64
        }
    }

    fn check_col(&self, j: usize) -> Result<()> {
        if j >= self.n_cols {
            Err(Error::Index {
                index: j,
                len: self.n_cols,
            })
        } else {
            Ok(())
        }
    }

    /// Row indices and values of column `j`. Panics if `j` is out of range.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.data[range])
    }

    pub fn column(&self, j: usize) -> Result<(&[usize], &[f64])> {
        self.check_col(j)?;
        Ok(self.col(j))
    }

    /// `sum_i A_ij^2`.
    pub fn column_squared_norm(&self, j: usize) -> Result<f64> {
        self.check_col(j)?;
        let (_, vals) = self.col(j);
        Ok(vals.iter().map(|v| v * v).sum())
    }

    /// `out += scale * A[:, j]`, touching only the stored entries of column `j`.
    pub fn spmv_col_accumulate(&self, j: usize, scale: f64, out: &mut [f64]) -> Result<()> {
        self.check_col(j)?;
        if out.len() != self.n_rows {
            return Err(Error::Dimension {
                expected: self.n_rows,
                found: out.len(),
            });
        }
        self.axpy_col(j, scale, out);
        Ok(())
    }

    #[inline]
    pub(crate) fn axpy_col(&self, j: usize, scale: f64, out: &mut [f64]) {
        let (rows, vals) = self.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            out[i] += scale * v;
        }
    }

    /// `A[:, j] . v` without bounds checks on `j` beyond slicing.
    #[inline]
    pub(crate) fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        let (rows, vals) = self.col(j);
        rows.iter().zip(vals).map(|(&i, &a)| a * v[i]).sum()
    }

    /// `A x`, accumulated column by column.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::Dimension {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.axpy_col(j, xj, &mut out);
            }
        }
        Ok(out)
    }

    /// `A^T y`.
    pub fn transpose_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n_rows {
            return Err(Error::Dimension {
                expected: self.n_rows,
                found: y.len(),
            });
        }
        Ok((0..self.n_cols).map(|j| self.col_dot(j, y)).collect())
    }

    /// All stored entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            out.extend(rows.iter().zip(vals).map(|(&i, &v)| (i, j, v)));
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_rows + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for i in 0..self.n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut row_idx = vec![0usize; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        // Columns are visited in ascending order, so rows of the transpose
        // come out sorted.
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                row_idx[next[i]] = j;
                data[next[i]] = v;
                next[i] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            col_ptr: counts,
            row_idx,
            data,
        }
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.n_rows {
            return Err(Error::Dimension {
                expected: self.n_rows,
                found: scale.len(),
            });
        }
        let mut out = self.clone();
        for (v, &i) in out.data.iter_mut().zip(&self.row_idx) {
            *v *= scale[i];
        }
        Ok(out)
    }

    /// Scales each nonempty column to unit Euclidean norm.
    pub fn normalize_columns(&mut self) {
        for j in 0..self.n_cols {
            let range = self.col_ptr[j]..self.col_ptr[j + 1];
            let norm = self.data[range.clone()].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                self.data[range].iter_mut().for_each(|v| *v /= norm);
            }
        }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let mut col_ptr = Vec::with_capacity(cols.len() + 1);
        let mut row_idx = Vec::new();
        let mut data = Vec::new();
        col_ptr.push(0);
        for &j in cols {
            let (rows, vals) = self.column(j)?;
            row_idx.extend_from_slice(rows);
            data.extend_from_slice(vals);
            col_ptr.push(row_idx.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: cols.len(),
            col_ptr,
            row_idx,
            data,
        })
    }

    /// Row-major dense copy. Meant for small matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols];
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                out[i * self.n_cols + j] = v;
            }
        }
        out
    }
}
