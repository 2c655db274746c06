//! Compressed sparse row storage and the uniform-precision kernels around it.

mod cond;
mod mm;
mod scaling;

use serde::{Deserialize, Serialize};

pub use cond::{cond2_transpose, kappa_inf};
pub use mm::{read_matrix_market, read_matrix_market_file, write_matrix_market};
pub use scaling::{column_scale_transpose, ScalingDiag};

use crate::dense::{DenseMatrix, Field};
use crate::error::{Error, Result};
use crate::precision::{DoubleDouble, FpFormat};

/// Real sparse matrix in CSR form.
///
/// Column indices are strictly increasing within a row and no explicit
/// zeros are stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Validates raw CSR arrays. Explicit zeros are pruned; out-of-order or
    /// duplicate column indices are rejected.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 || row_ptr[0] != 0 {
            return Err(Error::Dimension(format!(
                "row_ptr must have {} entries starting at 0",
                n_rows + 1
            )));
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != col_idx.len() {
            return Err(Error::Dimension("row_ptr, col_idx and values disagree on nnz".into()));
        }
        let mut out_ptr = Vec::with_capacity(n_rows + 1);
        let mut out_col = Vec::with_capacity(col_idx.len());
        let mut out_val = Vec::with_capacity(values.len());
        out_ptr.push(0);
        for i in 0..n_rows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::Dimension(format!("row_ptr decreases at row {i}")));
            }
            let mut prev: Option<usize> = None;
            for p in lo..hi {
                let j = col_idx[p];
                if j >= n_cols {
                    return Err(Error::Dimension(format!("column {j} out of range in row {i}")));
                }
                if prev.is_some_and(|q| q >= j) {
                    return Err(Error::Dimension(format!(
                        "column indices of row {i} are not strictly increasing"
                    )));
                }
                prev = Some(j);
                if values[p] != 0.0 {
                    out_col.push(j);
                    out_val.push(values[p]);
                }
            }
            out_ptr.push(out_col.len());
        }
        Ok(SparseMatrix { n_rows, n_cols, row_ptr: out_ptr, col_idx: out_col, values: out_val })
    }

    /// Builds a matrix from 0-based `(row, col, value)` triplets in any
    /// order. Duplicate coordinates are an error.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(i, j, _) in &sorted {
            if i >= n_rows || j >= n_cols {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = sorted.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::Dimension(format!("duplicate entry ({}, {})", w[0].0, w[0].1)));
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(i, _, _) in &sorted {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = sorted.iter().map(|t| t.1).collect();
        let values = sorted.iter().map(|t| t.2).collect();
        Self::from_csr(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_csr(n, n, (0..=n).collect(), (0..n).collect(), d.to_vec())
            .expect("diagonal CSR is well formed")
    }

    /// Sparse matrix holding the nonzeros of a row-major dense array.
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut trip = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n_cols, "ragged dense rows");
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &trip).expect("dense rows are well formed")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.n_rows).map(|i| self.row_nnz(i)).max().unwrap_or(0)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    /// Index of the first zero diagonal entry, if any.
    pub fn first_zero_diagonal(&self) -> Option<usize> {
        (0..self.n_rows.min(self.n_cols)).find(|&i| self.get(i, i) == 0.0)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut count = vec![0usize; self.n_cols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            count[j + 1] += count[j];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        SparseMatrix { n_rows: self.n_cols, n_cols: self.n_rows, row_ptr, col_idx, values }
    }

    /// `A * diag(d)`.
    pub fn scale_columns(&self, d: &[f64]) -> SparseMatrix {
        assert_eq!(d.len(), self.n_cols);
        let mut out = self.clone();
        for (v, &j) in out.values.iter_mut().zip(&self.col_idx) {
            *v *= d[j];
        }
        out.prune()
    }

    /// Applies `f` to every stored value, then drops entries that became zero.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SparseMatrix {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v = f(*v);
        }
        out.prune()
    }

    fn prune(self) -> SparseMatrix {
        if self.values.iter().all(|&v| v != 0.0) {
            return self;
        }
        Self::from_csr(self.n_rows, self.n_cols, self.row_ptr, self.col_idx, self.values)
            .expect("pruning preserves validity")
    }

    /// Sparse product `self * other`, accumulated in double.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut acc = vec![0.0; other.n_cols];
        let mut mark = vec![usize::MAX; other.n_cols];
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            let mut touched = Vec::new();
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&j, &b) in ocols.iter().zip(ovals) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for j in touched {
                if acc[j] != 0.0 {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { n_rows: self.n_rows, n_cols: other.n_cols, row_ptr, col_idx, values })
    }

    pub fn to_dense<T: Field>(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d.set(i, j, T::from_f64(v));
            }
        }
        d
    }

    /// Native double CSR product.
    pub fn spmv(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut s = 0.0;
                for (&j, &v) in cols.iter().zip(vals) {
                    s += v * x[j];
                }
                s
            })
            .collect()
    }

    /// Product accumulated in double-double from double inputs.
    pub fn spmv_dd(&self, x: &[f64]) -> Vec<DoubleDouble> {
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .fold(DoubleDouble::ZERO, |s, (&j, &v)| s.add_prod(v, x[j]))
            })
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.n_cols];
        for (&j, &v) in self.col_idx.iter().zip(&self.values) {
            sums[j] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn norm_frob(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn norm_inf(a: &SparseMatrix) -> f64 {
    a.norm_inf()
}

pub fn norm_frob(a: &SparseMatrix) -> f64 {
    a.norm_frob()
}

pub fn norm_max(a: &SparseMatrix) -> f64 {
    a.norm_max()
}

pub fn vec_norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn vec_norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `y = A x` with every multiply and add rounded to `fmt`.
///
/// The entries of `A` and `x` are rounded to `fmt` before use, and each row
/// is accumulated left to right in ascending column order. With
/// `fmt = Double` this is exactly the native CSR product.
pub fn spmv_uniform(a: &SparseMatrix, x: &[f64], fmt: FpFormat) -> Result<Vec<f64>> {
    if x.len() != a.n_cols {
        return Err(Error::Dimension(format!(
            "vector of length {} against a matrix with {} columns",
            x.len(),
            a.n_cols
        )));
    }
    if fmt == FpFormat::Double {
        return Ok(a.spmv(x));
    }
    let xr: Vec<f64> = x.iter().map(|&v| fmt.round(v)).collect();
    Ok((0..a.n_rows)
        .map(|i| {
            let (cols, vals) = a.row(i);
            let mut s = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                s = fmt.add(s, fmt.mul(fmt.round(v), xr[j]));
            }
            s
        })
        .collect())
}
