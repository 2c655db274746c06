//! One-sided column scaling applied before building the approximate inverse.

use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Positive diagonal scaling `D = diag(d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingDiag {
    d: Vec<f64>,
}

impl ScalingDiag {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if let Some(p) = d.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("scaling entry {p} is not a positive finite number")));
        }
        Ok(ScalingDiag { d })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// `m * D`.
    pub fn apply_right(&self, m: &SparseMatrix) -> SparseMatrix {
        m.scale_columns(&self.d)
    }
}

/// Returns `B = A^T D` with `d_j = 1 / max_i |(A^T)_ij|`, so every column of
/// `B` has largest magnitude exactly 1.
///
/// Entries are divided by the column maximum rather than multiplied by its
/// reciprocal: `x * (1/x)` is not always 1 in floating point.
pub fn column_scale_transpose(a: &SparseMatrix) -> Result<(SparseMatrix, ScalingDiag)> {
    let mut maxima = Vec::with_capacity(a.n_rows());
    for i in 0..a.n_rows() {
        let m = a.row(i).1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return Err(Error::ZeroRow { row: i });
        }
        maxima.push(m);
    }
    let scaled_rows = SparseMatrix::from_csr(
        a.n_rows(),
        a.n_cols(),
        a.row_ptr().to_vec(),
        a.col_idx().to_vec(),
        (0..a.n_rows())
            .flat_map(|i| a.row(i).1.iter().map(move |&v| (v, i)))
            .map(|(v, i)| v / maxima[i])
            .collect(),
    )?;
    let d = ScalingDiag::new(maxima.iter().map(|m| 1.0 / m).collect())?;
    Ok((scaled_rows.transpose(), d))
}
