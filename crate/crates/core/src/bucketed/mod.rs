//! Magnitude bucketing and the adaptive-precision sparse matrix-vector
//! product.
//!
//! Given precisions `u_1 < u_2 < ... < u_q` and a target accuracy `eps`, an
//! entry `a_ij` goes to the lowest precision `u_k` for which
//! `|a_ij| <= eps ||A|| / u_k` still holds:
//!
//! ```text
//! bucket 1:        |a| >  eps ||A|| / u_2
//! bucket k:        eps ||A|| / u_{k+1} < |a| <= eps ||A|| / u_k
//! bucket q:        |a| <= eps ||A|| / u_q
//! ```
//!
//! The drop pseudo-format has unit roundoff 1, so a trailing drop bucket
//! discards every entry with `|a| <= eps ||A||`.
//!
//! Entries of a lower-precision bucket can be far below the smallest normal
//! number of its format (half-precision entries of a matrix with
//! `eps = 2^-53` sit near `2^-42 ||A||`). Every bucket after the first is
//! therefore stored with a power-of-two scale, and the vector is scaled the
//! same way when the bucket is applied. Scaling by powers of two is exact,
//! so each bucket still rounds at its own precision, just without losing
//! entries to underflow. The first bucket is never scaled.

mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{DoubleDouble, FpFormat};
use crate::sparsemat::{vec_norm_inf, SparseMatrix};

/// Norm of `A` used in the bucket thresholds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BucketNorm {
    /// `max_ij |a_ij|`
    #[default]
    MaxAbs,
    /// Max absolute row sum.
    Inf,
}

/// Which form of the bound constant `c` to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CFormula {
    /// `(1 + (q-1) u_1) + max_i sum_k p_ik^2 (1 + u_k)^2`
    #[default]
    Printed,
    /// Same with `p_ik` in place of `p_ik^2`.
    Unsquared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketScheme {
    /// Strictly increasing unit roundoffs.
    pub precisions: Vec<FpFormat>,
    pub eps_target: f64,
    #[serde(default)]
    pub norm: BucketNorm,
}

impl BucketScheme {
    pub fn new(precisions: Vec<FpFormat>, eps_target: f64, norm: BucketNorm) -> Result<Self> {
        let s = BucketScheme { precisions, eps_target, norm };
        s.validate()?;
        Ok(s)
    }

    /// A single bucket: everything stored and applied in `fmt`.
    pub fn uniform(fmt: FpFormat) -> Self {
        BucketScheme { precisions: vec![fmt], eps_target: fmt.unit_roundoff(), norm: BucketNorm::MaxAbs }
    }

    pub fn validate(&self) -> Result<()> {
        let Some(&first) = self.precisions.first() else {
            return Err(Error::Config("a bucket scheme needs at least one precision".into()));
        };
        if first == FpFormat::Drop {
            return Err(Error::Config("the first bucket cannot be the drop format".into()));
        }
        if self.precisions.windows(2).any(|w| w[0].unit_roundoff() >= w[1].unit_roundoff()) {
            return Err(Error::Config("bucket precisions must have strictly increasing unit roundoff".into()));
        }
        if !(self.eps_target >= first.unit_roundoff()) || !self.eps_target.is_finite() {
            return Err(Error::Config(format!(
                "bucket target accuracy {:e} is below u_1 = {:e}",
                self.eps_target,
                first.unit_roundoff()
            )));
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.precisions.len()
    }

    fn norm_of(&self, a: &SparseMatrix) -> f64 {
        match self.norm {
            BucketNorm::MaxAbs => a.norm_max(),
            BucketNorm::Inf => a.norm_inf(),
        }
    }

    /// Lower interval ends `eps ||A|| / u_k` for `k = 2..=q` (0-based
    /// position `k - 2`).
    pub fn thresholds(&self, norm_value: f64) -> Vec<f64> {
        self.precisions[1..]
            .iter()
            .map(|f| self.eps_target * norm_value / f.unit_roundoff())
            .collect()
    }

    /// 0-based bucket of an entry with magnitude `abs`.
    pub fn classify(&self, abs: f64, thresholds: &[f64]) -> usize {
        let q = self.q();
        if q == 1 {
            return 0;
        }
        if abs > thresholds[0] {
            return 0;
        }
        if abs <= thresholds[q - 2] {
            return q - 1;
        }
        // middle buckets: t_{k+1} < |a| <= t_k
        (1..q - 1)
            .find(|&k| abs > thresholds[k] && abs <= thresholds[k - 1])
            .expect("thresholds are decreasing, so the intervals cover the middle range")
    }
}

/// One precision class of a bucketed matrix, in CSR form.
#[derive(Clone, Debug, PartialEq)]
pub struct Bucket {
    pub fmt: FpFormat,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    /// `round(a_ij * 2^scale_exp)` in `fmt` (zeros for the drop format).
    pub values: Vec<f64>,
    pub scale_exp: i32,
}

impl Bucket {
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    #[inline]
    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    fn row_count(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Stored values with the scale removed.
    pub fn unscaled_values(&self) -> Vec<f64> {
        let f = 2f64.powi(-self.scale_exp);
        self.values.iter().map(|v| v * f).collect()
    }
}

/// Exponent `e` with `max_abs * 2^e` in `[1/2, 1)`; 0 for zero or
/// non-finite input.
fn normalizing_exp(max_abs: f64) -> i32 {
    if max_abs == 0.0 || !max_abs.is_finite() {
        return 0;
    }
    -(max_abs.log2().floor() as i32) - 1
}

/// `x * 2^e` without intermediate overflow for large `|e|`.
fn ldexp(x: f64, e: i32) -> f64 {
    let half = e / 2;
    x * 2f64.powi(half) * 2f64.powi(e - half)
}

/// A sparse matrix whose entries are split into precision buckets.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketedMatrix {
    n_rows: usize,
    n_cols: usize,
    scheme: BucketScheme,
    norm_value: f64,
    buckets: Vec<Bucket>,
}

/// Splits the nonzeros of `a` into buckets and rounds each to its bucket's
/// format.
pub fn build_buckets(a: &SparseMatrix, scheme: &BucketScheme) -> Result<BucketedMatrix> {
    scheme.validate()?;
    let norm_value = scheme.norm_of(a);
    let thresholds = scheme.thresholds(norm_value);
    let mut buckets: Vec<Bucket> = scheme
        .precisions
        .iter()
        .map(|&fmt| Bucket { fmt, row_ptr: vec![0], col_idx: Vec::new(), values: Vec::new(), scale_exp: 0 })
        .collect();
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let b = &mut buckets[scheme.classify(v.abs(), &thresholds)];
            b.col_idx.push(j);
            b.values.push(v);
        }
        for b in buckets.iter_mut() {
            b.row_ptr.push(b.col_idx.len());
        }
    }
    for (k, b) in buckets.iter_mut().enumerate() {
        if b.fmt == FpFormat::Drop {
            b.values.iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        if k > 0 {
            b.scale_exp = normalizing_exp(b.values.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        let (fmt, e) = (b.fmt, b.scale_exp);
        b.values.iter_mut().for_each(|v| *v = fmt.round(ldexp(*v, e)));
    }
    Ok(BucketedMatrix { n_rows: a.n_rows(), n_cols: a.n_cols(), scheme: scheme.clone(), norm_value, buckets })
}

impl BucketedMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn q(&self) -> usize {
        self.buckets.len()
    }

    pub fn scheme(&self) -> &BucketScheme {
        &self.scheme
    }

    /// The value of `||A||` the thresholds were computed from.
    pub fn norm_value(&self) -> f64 {
        self.norm_value
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn nnz(&self) -> usize {
        self.buckets.iter().map(Bucket::nnz).sum()
    }

    /// Number of entries per bucket, over the whole matrix.
    pub fn occupancy(&self) -> Vec<usize> {
        self.buckets.iter().map(Bucket::nnz).collect()
    }

    /// `p_ik` for row `i`.
    pub fn row_occupancy(&self, i: usize) -> Vec<usize> {
        self.buckets.iter().map(|b| b.row_count(i)).collect()
    }

    /// Column indices of `B_ik`.
    pub fn bucket_members(&self, i: usize, k: usize) -> &[usize] {
        self.buckets[k].row(i).0
    }

    /// The matrix actually applied: stored values, dropped entries removed.
    pub fn to_sparse(&self) -> SparseMatrix {
        let mut trip = Vec::with_capacity(self.nnz());
        for b in &self.buckets {
            if b.fmt == FpFormat::Drop {
                continue;
            }
            let vals = b.unscaled_values();
            for i in 0..self.n_rows {
                let lo = b.row_ptr[i];
                let cols = b.row(i).0;
                trip.extend(cols.iter().enumerate().map(|(t, &j)| (i, j, vals[lo + t])));
            }
        }
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, &trip).expect("buckets partition a valid matrix")
    }

    pub fn c_constant(&self) -> f64 {
        self.c_constant_with(CFormula::Printed)
    }

    pub fn c_constant_with(&self, formula: CFormula) -> f64 {
        let u: Vec<f64> = self.buckets.iter().map(|b| b.fmt.unit_roundoff()).collect();
        c_from_row_occupancy((0..self.n_rows).map(|i| self.row_occupancy(i)), &u, formula)
    }

    /// `(q - 1) u_1 + c eps` for the given form of `c`.
    pub fn error_bound(&self, formula: CFormula) -> f64 {
        let q = self.q() as f64;
        let u1 = self.scheme.precisions[0].unit_roundoff();
        (q - 1.0) * u1 + self.c_constant_with(formula) * self.scheme.eps_target
    }

    pub fn storage_ratio(&self) -> f64 {
        storage_ratio_from_occupancy(&self.occupancy(), &self.scheme.precisions)
    }
}

/// `c` evaluated from per-row bucket counts and the bucket unit roundoffs.
pub fn c_from_row_occupancy<I>(rows: I, unit_roundoffs: &[f64], formula: CFormula) -> f64
where
    I: IntoIterator<Item = Vec<usize>>,
{
    let q = unit_roundoffs.len() as f64;
    let lead = 1.0 + (q - 1.0) * unit_roundoffs[0];
    let worst = rows
        .into_iter()
        .map(|p| {
            p.iter()
                .zip(unit_roundoffs)
                .map(|(&pk, &uk)| {
                    let pk = pk as f64;
                    let w = match formula {
                        CFormula::Printed => pk * pk,
                        CFormula::Unsquared => pk,
                    };
                    w * (1.0 + uk) * (1.0 + uk)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    lead + worst
}

/// Storage of mixed-precision buckets relative to keeping every entry in
/// the first format.
pub fn storage_ratio_from_occupancy(occupancy: &[usize], formats: &[FpFormat]) -> f64 {
    let nnz: usize = occupancy.iter().sum();
    if nnz == 0 {
        return 1.0;
    }
    let bits: f64 = occupancy
        .iter()
        .zip(formats)
        .map(|(&p, f)| p as f64 * f.bits() as f64)
        .sum();
    bits / (nnz as f64 * formats[0].bits() as f64)
}

/// Adaptive-precision product `y = M x`.
///
/// For every row, the partial sum over bucket `k` is accumulated in `u_k`
/// (operands rounded to `u_k`, ascending column order; the drop bucket
/// contributes nothing). The partial sums are then added in `u_1` in
/// ascending bucket order.
pub fn bspmv(m: &BucketedMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.n_cols {
        return Err(Error::Dimension(format!(
            "vector of length {} against a matrix with {} columns",
            x.len(),
            m.n_cols
        )));
    }
    let u1 = m.buckets[0].fmt;
    let x_exp = normalizing_exp(vec_norm_inf(x));
    // per bucket: operand vector in the bucket format, and the exponent
    // that undoes both scalings
    let operands: Vec<(Option<Vec<f64>>, i32)> = m
        .buckets
        .iter()
        .enumerate()
        .map(|(k, b)| {
            if k == 0 {
                match b.fmt {
                    FpFormat::Double | FpFormat::Quad => (None, 0),
                    f => (Some(x.iter().map(|&v| f.round(v)).collect()), 0),
                }
            } else if b.fmt == FpFormat::Drop || b.nnz() == 0 {
                (None, 0)
            } else {
                let xs = x.iter().map(|&v| b.fmt.round(ldexp(v, x_exp))).collect();
                (Some(xs), -(b.scale_exp + x_exp))
            }
        })
        .collect();
    let mut y = vec![0.0; m.n_rows];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (b, (xr, undo)) in m.buckets.iter().zip(&operands) {
            if b.fmt == FpFormat::Drop || b.nnz() == 0 {
                continue;
            }
            let xk = xr.as_deref().unwrap_or(x);
            let fmt = b.fmt;
            let (cols, vals) = b.row(i);
            let mut partial = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                partial = fmt.add(partial, fmt.mul(v, xk[j]));
            }
            acc = u1.add(acc, ldexp(partial, *undo));
        }
        *yi = acc;
    }
    Ok(y)
}

/// `||y_hat - A x||_inf / (||A||_inf ||x||_inf)`, with `A x` accumulated in
/// double-double.
pub fn normwise_backward_error(a: &SparseMatrix, x: &[f64], y_hat: &[f64]) -> Result<f64> {
    if x.len() != a.n_cols() || y_hat.len() != a.n_rows() {
        return Err(Error::Dimension("backward error operands do not conform".into()));
    }
    let (na, nx) = (a.norm_inf(), vec_norm_inf(x));
    if na == 0.0 || nx == 0.0 {
        return Err(Error::Config("backward error is undefined for a zero matrix or vector".into()));
    }
    let exact = a.spmv_dd(x);
    let diff = exact
        .iter()
        .zip(y_hat)
        .map(|(&e, &y)| (DoubleDouble::from_f64(y) - e).to_f64().abs())
        .fold(0.0, f64::max);
    Ok(diff / (na * nx))
}
