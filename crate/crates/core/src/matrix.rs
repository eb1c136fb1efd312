//! Dense row-major `f64` matrix with samples as rows.

use std::fmt;

use crate::error::{AimeError, Result};
use crate::rng::RngStream;

/// Columns whose standard deviation falls below this are treated as constant.
pub const CONSTANT_SD: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(AimeError::shape("from_vec", (rows, cols), (data.len(), 1)));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows. Panics on ragged input; intended for literals.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.as_ref().len(), c, "ragged rows");
            data.extend_from_slice(row.as_ref());
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Standard-normal entries drawn row by row from `rng`.
    pub fn random_normal(rows: usize, cols: usize, rng: &mut RngStream) -> Self {
        Self::from_fn(rows, cols, |_, _| rng.normal())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (i, v) in values.iter().enumerate() {
            self.data[i * self.cols + j] = *v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        Matrix::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(AimeError::shape("sub", self.shape(), other.shape()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Squared Frobenius distance; shapes must agree.
    pub fn squared_distance(&self, other: &Matrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(AimeError::shape("squared_distance", self.shape(), other.shape()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(AimeError::shape("hstack", self.shape(), other.shape()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            data,
        })
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `a · b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(AimeError::shape("matmul", a.shape(), b.shape()));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let arow = a.row(i);
        let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in arow.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// `a · bᵀ` without materialising the transpose.
pub fn matmul_transpose_b(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.cols {
        return Err(AimeError::shape("matmul_transpose_b", a.shape(), b.shape()));
    }
    let mut out = Matrix::zeros(a.rows, b.rows);
    for i in 0..a.rows {
        let arow = a.row(i);
        for j in 0..b.rows {
            out.data[i * b.rows + j] = dot(arow, b.row(j));
        }
    }
    Ok(out)
}

/// `aᵀ · b` without materialising the transpose.
pub fn matmul_transpose_a(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(AimeError::shape("matmul_transpose_a", a.shape(), b.shape()));
    }
    let mut out = Matrix::zeros(a.cols, b.cols);
    for k in 0..a.rows {
        let arow = a.row(k);
        let brow = b.row(k);
        for (i, &aki) in arow.iter().enumerate() {
            if aki == 0.0 {
                continue;
            }
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aki * bkj;
            }
        }
    }
    Ok(out)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Copy of `m` with column `col` shuffled by Fisher–Yates driven by `rng`.
pub fn permute_column(m: &Matrix, col: usize, rng: &mut RngStream) -> Result<Matrix> {
    if col >= m.cols {
        return Err(AimeError::Index {
            what: "column",
            index: col,
            len: m.cols,
        });
    }
    let mut values = m.column(col);
    rng.shuffle(&mut values);
    let mut out = m.clone();
    out.set_column(col, &values);
    Ok(out)
}

/// Per-column statistics: mean and sample standard deviation (divisor `n - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

/// Column means and sample standard deviations, two-pass.
pub fn column_stats(m: &Matrix) -> Result<ColumnStats> {
    if m.rows < 2 {
        return Err(AimeError::InsufficientData(format!(
            "standard deviation needs at least 2 rows, got {}",
            m.rows
        )));
    }
    let n = m.rows as f64;
    let mut means = vec![0.0; m.cols];
    for i in 0..m.rows {
        for (acc, v) in means.iter_mut().zip(m.row(i)) {
            *acc += v;
        }
    }
    means.iter_mut().for_each(|s| *s /= n);
    let mut ss = vec![0.0; m.cols];
    for i in 0..m.rows {
        for ((acc, v), mu) in ss.iter_mut().zip(m.row(i)).zip(&means) {
            *acc += (v - mu) * (v - mu);
        }
    }
    let sds = ss.into_iter().map(|s| (s / (n - 1.0)).sqrt()).collect();
    Ok(ColumnStats { means, sds })
}

/// Z-scores each column with the supplied statistics. Columns with
/// `sd < CONSTANT_SD` become all-zero.
pub fn standardize_columns(m: &Matrix, stats: &ColumnStats) -> Result<Matrix> {
    check_stats(m, stats, "standardize_columns")?;
    let mut out = m.clone();
    for i in 0..m.rows {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            let sd = stats.sds[j];
            *v = if sd < CONSTANT_SD {
                0.0
            } else {
                (*v - stats.means[j]) / sd
            };
        }
    }
    Ok(out)
}

/// Inverse of [`standardize_columns`]; constant columns map back to their mean.
pub fn destandardize_columns(m: &Matrix, stats: &ColumnStats) -> Result<Matrix> {
    check_stats(m, stats, "destandardize_columns")?;
    let mut out = m.clone();
    for i in 0..m.rows {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            let sd = stats.sds[j];
            *v = if sd < CONSTANT_SD {
                stats.means[j]
            } else {
                *v * sd + stats.means[j]
            };
        }
    }
    Ok(out)
}

fn check_stats(m: &Matrix, stats: &ColumnStats, op: &'static str) -> Result<()> {
    if stats.means.len() != m.cols || stats.sds.len() != m.cols {
        return Err(AimeError::shape(
            op,
            m.shape(),
            (stats.means.len(), stats.sds.len()),
        ));
    }
    Ok(())
}
