//! Dense and sparse linear-algebra kernels.
//!
//! Matrices are immutable after construction and safe to share across
//! threads. `matvec`/`matvec_t` parallelize over fixed row chunks, so the
//! `parallel` and sequential builds agree bitwise.

mod eig;
mod fwht;

pub use eig::sym_eig;
pub use fwht::{fwht, fwht_inplace};

use crate::error::{Error, Result};
use crate::par;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn nrm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "DenseMatrix::new",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("DenseMatrix::new"));
        }
        Ok(Self { rows, cols, data })
    }

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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "matvec",
                expected: self.cols,
                got: x.len(),
            });
        }
        let parts = par::map_chunks(self.rows, |r| {
            r.map(|i| dot(self.row(i), x)).collect::<Vec<f64>>()
        });
        Ok(parts.concat())
    }

    /// `A^T x`
    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "matvec_t",
                expected: self.rows,
                got: x.len(),
            });
        }
        let parts = par::map_chunks(self.rows, |r| {
            let mut acc = vec![0.0; self.cols];
            for i in r {
                axpy(x[i], self.row(i), &mut acc);
            }
            acc
        });
        Ok(sum_partials(parts, self.cols))
    }

    /// `A^T A` as a dense matrix (used by small-scale Gram checks).
    pub fn gram(&self) -> DenseMatrix {
        let d = self.cols;
        let mut g = DenseMatrix::zeros(d, d);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..d {
                if r[a] == 0.0 {
                    continue;
                }
                for b in 0..d {
                    g.data[a * d + b] += r[a] * r[b];
                }
            }
        }
        g
    }
}

fn sum_partials(parts: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for p in parts {
        axpy(1.0, &p, &mut out);
    }
    out
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != rows + 1 || row_offsets[0] != 0 {
            return Err(Error::InvalidParam("CSR row_offsets malformed".into()));
        }
        if *row_offsets.last().unwrap() != values.len() || col_indices.len() != values.len() {
            return Err(Error::InvalidParam(
                "CSR offsets/indices/values lengths disagree".into(),
            ));
        }
        if row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParam("CSR row_offsets decrease".into()));
        }
        for i in 0..rows {
            let r = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if r.iter().any(|&j| j >= cols) {
                return Err(Error::InvalidParam("CSR column index out of range".into()));
            }
            if r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParam(
                    "CSR column indices not strictly increasing within a row".into(),
                ));
            }
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("CsrMatrix::new"));
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row_iter(i) {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Column-major mirror; built once so sketch construction can walk
    /// columns without scanning every row.
    pub fn to_csc(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.cols];
        for &j in &self.col_indices {
            counts[j] += 1;
        }
        let mut col_offsets = vec![0usize; self.cols + 1];
        for j in 0..self.cols {
            col_offsets[j + 1] = col_offsets[j] + counts[j];
        }
        let mut row_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut cursor = col_offsets.clone();
        for i in 0..self.rows {
            for (j, v) in self.row_iter(i) {
                let k = cursor[j];
                row_indices[k] = i;
                values[k] = v;
                cursor[j] += 1;
            }
        }
        CscMatrix {
            rows: self.rows,
            cols: self.cols,
            col_offsets,
            row_indices,
            values,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "matvec",
                expected: self.cols,
                got: x.len(),
            });
        }
        let parts = par::map_chunks(self.rows, |r| {
            r.map(|i| self.row_iter(i).map(|(j, v)| v * x[j]).sum())
                .collect::<Vec<f64>>()
        });
        Ok(parts.concat())
    }

    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "matvec_t",
                expected: self.rows,
                got: x.len(),
            });
        }
        let parts = par::map_chunks(self.rows, |r| {
            let mut acc = vec![0.0; self.cols];
            for i in r {
                for (j, v) in self.row_iter(i) {
                    acc[j] += x[i] * v;
                }
            }
            acc
        });
        Ok(sum_partials(parts, self.cols))
    }
}

/// Compressed sparse column view produced by [`CsrMatrix::to_csc`].
#[derive(Debug, Clone)]
pub struct CscMatrix {
    rows: usize,
    cols: usize,
    col_offsets: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col_iter(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.col_offsets[j];
        let hi = self.col_offsets[j + 1];
        self.row_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }
}

/// Feature matrix: dense for compact data, CSR for sparse data.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Csr(CsrMatrix),
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Csr(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Csr(m) => m.cols(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Matrix::Dense(m) => m.matvec(x),
            Matrix::Csr(m) => m.matvec(x),
        }
    }

    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Matrix::Dense(m) => m.matvec_t(x),
            Matrix::Csr(m) => m.matvec_t(x),
        }
    }

    /// `<row_i, v>`
    #[inline]
    pub fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        match self {
            Matrix::Dense(m) => dot(m.row(i), v),
            Matrix::Csr(m) => m.row_iter(i).map(|(j, x)| x * v[j]).sum(),
        }
    }

    /// `out += c * row_i`
    #[inline]
    pub fn row_axpy(&self, i: usize, c: f64, out: &mut [f64]) {
        match self {
            Matrix::Dense(m) => axpy(c, m.row(i), out),
            Matrix::Csr(m) => {
                for (j, x) in m.row_iter(i) {
                    out[j] += c * x;
                }
            }
        }
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        match self {
            Matrix::Dense(m) => dot(m.row(i), m.row(i)),
            Matrix::Csr(m) => m.row_iter(i).map(|(_, x)| x * x).sum(),
        }
    }

    /// Nonzero entries of row `i` in ascending column order.
    pub fn row_entries(&self, i: usize) -> Vec<(usize, f64)> {
        match self {
            Matrix::Dense(m) => m
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect(),
            Matrix::Csr(m) => m.row_iter(i).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Csr(m) => m.to_dense(),
        }
    }
}
