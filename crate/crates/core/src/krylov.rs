//! Left-preconditioned MGS-GMRES with simulated precisions.
//!
//! Solves `M A d = M r` without forming `M A`: each Arnoldi step multiplies
//! by `A` in the matvec precision and then applies the bucketed `M`. All
//! orthogonalization, rotations and the final update run in the working
//! precision. No restarting.

use serde::{Deserialize, Serialize};

use crate::bucketed::{bspmv, BucketedMatrix};
use crate::error::{Error, Result};
use crate::precision::FpFormat;
use crate::sparsemat::{spmv_uniform, SparseMatrix};

/// Something that can be applied as a left preconditioner.
pub trait Preconditioner: Sync {
    fn shape(&self) -> (usize, usize);
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl Preconditioner for BucketedMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.n_rows(), self.n_cols())
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        bspmv(self, x)
    }
}

/// A plain sparse preconditioner stored and applied in one format.
#[derive(Clone, Copy, Debug)]
pub struct UniformPreconditioner<'a> {
    pub matrix: &'a SparseMatrix,
    pub fmt: FpFormat,
}

impl Preconditioner for UniformPreconditioner<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.matrix.n_rows(), self.matrix.n_cols())
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        spmv_uniform(self.matrix, x, self.fmt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmresConfig {
    /// Relative tolerance on the preconditioned residual.
    pub tol: f64,
    pub max_iters: usize,
    pub fmt_work: FpFormat,
    pub fmt_matvec: FpFormat,
}

impl GmresConfig {
    /// Uniform working and matvec precision, capped at `n` iterations.
    pub fn new(tol: f64, n: usize, fmt: FpFormat) -> Self {
        GmresConfig { tol, max_iters: n.max(1), fmt_work: fmt, fmt_matvec: fmt }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("GMRES tolerance {} not in (0, 1)", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("GMRES needs at least one iteration".into()));
        }
        if self.fmt_work == FpFormat::Drop || self.fmt_matvec == FpFormat::Drop {
            return Err(Error::Config("GMRES cannot run in the drop format".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmresResult {
    pub d: Vec<f64>,
    pub iterations: usize,
    /// Estimated `||M(r - A d_j)||_2 / ||M r||_2` after each iteration.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

fn dot(fmt: FpFormat, a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |s, (&x, &y)| fmt.add(s, fmt.mul(x, y)))
}

fn norm2(fmt: FpFormat, a: &[f64]) -> f64 {
    // scale by the largest entry so half precision does not overflow
    let m = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s = a.iter().fold(0.0, |s, &x| {
        let t = fmt.div(x, m);
        fmt.add(s, fmt.mul(t, t))
    });
    fmt.mul(m, fmt.sqrt(s))
}

/// Rotation `(c, s)` with `[c s; -s c] [a; b] = [r; 0]`.
fn givens(fmt: FpFormat, a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0, a);
    }
    let r = norm2(fmt, &[a, b]);
    (fmt.div(a, r), fmt.div(b, r), r)
}

/// Left-preconditioned GMRES for `M A d = M r`.
pub fn gmres_left<P>(a: &SparseMatrix, m: &P, r: &[f64], cfg: &GmresConfig) -> Result<GmresResult>
where
    P: Preconditioner + ?Sized,
{
    cfg.validate()?;
    let n = a.n_rows();
    let (mr, mc) = m.shape();
    if !a.is_square() || r.len() != n || mr != n || mc != n {
        return Err(Error::Dimension(format!(
            "GMRES on a {}x{} matrix with a {}x{} preconditioner and rhs of length {}",
            a.n_rows(),
            a.n_cols(),
            mr,
            mc,
            r.len()
        )));
    }
    let g = cfg.fmt_work;
    let precondition = |v: &[f64]| -> Result<Vec<f64>> {
        let w = spmv_uniform(a, v, cfg.fmt_matvec)?;
        let mut z = m.apply(&w)?;
        z.iter_mut().for_each(|x| *x = g.round(*x));
        Ok(z)
    };

    let mut s: Vec<f64> = m.apply(r)?.into_iter().map(|x| g.round(x)).collect();
    let beta = norm2(g, &s);
    if !beta.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    if beta == 0.0 {
        return Ok(GmresResult { d: vec![0.0; n], iterations: 0, residual_history: vec![], converged: true });
    }
    s.iter_mut().for_each(|x| *x = g.div(*x, beta));

    let kmax = cfg.max_iters.min(n.max(1));
    let mut basis: Vec<Vec<f64>> = vec![s];
    // columns of the rotated Hessenberg matrix, `h[j]` has length j + 2
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut rot: Vec<(f64, f64)> = Vec::with_capacity(kmax);
    let mut rhs = vec![beta];
    let mut history = Vec::new();
    let mut converged = false;

    for j in 0..kmax {
        let mut z = precondition(&basis[j])?;
        let mut col = Vec::with_capacity(j + 2);
        for v in &basis {
            let hij = dot(g, &z, v);
            for (zi, &vi) in z.iter_mut().zip(v) {
                *zi = g.sub(*zi, g.mul(hij, vi));
            }
            col.push(hij);
        }
        let sub = norm2(g, &z);
        col.push(sub);
        if col.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { iteration: j + 1 });
        }

        for (i, &(c, sn)) in rot.iter().enumerate() {
            let (x, y) = (col[i], col[i + 1]);
            col[i] = g.add(g.mul(c, x), g.mul(sn, y));
            col[i + 1] = g.sub(g.mul(c, y), g.mul(sn, x));
        }
        let (c, sn, rr) = givens(g, col[j], col[j + 1]);
        col[j] = rr;
        col[j + 1] = 0.0;
        rot.push((c, sn));
        let gj = rhs[j];
        rhs[j] = g.mul(c, gj);
        rhs.push(-g.mul(sn, gj));
        h.push(col);

        let estimate = rhs[j + 1].abs() / beta;
        if !estimate.is_finite() {
            return Err(Error::NonFinite { iteration: j + 1 });
        }
        history.push(estimate);
        if sub == 0.0 || estimate <= cfg.tol {
            converged = true;
            break;
        }
        z.iter_mut().for_each(|x| *x = g.div(*x, sub));
        basis.push(z);
    }

    let k = h.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = rhs[i];
        for jj in i + 1..k {
            acc = g.sub(acc, g.mul(h[jj][i], y[jj]));
        }
        y[i] = g.div(acc, h[i][i]);
    }
    let mut d = vec![0.0; n];
    for (yi, v) in y.iter().zip(&basis) {
        for (di, &vi) in d.iter_mut().zip(v) {
            *di = g.add(*di, g.mul(*yi, vi));
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { iteration: k });
    }
    Ok(GmresResult { d, iterations: k, residual_history: history, converged })
}
