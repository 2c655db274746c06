//! Small dense least-squares solves for single columns of the inverse.

use crate::precision::FpFormat;

/// Column-major dense block.
pub(crate) struct Block {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Block {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Block { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }
}

fn dot(fmt: FpFormat, a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |s, (&x, &y)| fmt.add(s, fmt.mul(x, y)))
}

/// Solves `min ||rhs - A y||_2` by Householder QR with every operation
/// rounded to `fmt`. Returns `None` when `R` is numerically rank deficient.
pub(crate) fn householder_solve(a: &Block, rhs: &[f64], fmt: FpFormat) -> Option<Vec<f64>> {
    let (m, n) = (a.rows, a.cols);
    if n > m {
        return None;
    }
    let mut r = Block { rows: m, cols: n, data: a.data.clone() };
    let mut b = rhs.to_vec();
    let mut diag = vec![0.0; n];
    let u = fmt.unit_roundoff();

    for k in 0..n {
        let x = &r.data[k * m + k..(k + 1) * m];
        let norm = fmt.sqrt(dot(fmt, x, x));
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] = fmt.sub(v[0], alpha);
        let vtv = dot(fmt, &v, &v);
        diag[k] = alpha;
        if vtv != 0.0 {
            for j in k + 1..n {
                let col = &mut r.data[j * m + k..(j + 1) * m];
                let t = fmt.div(fmt.mul(2.0, dot(fmt, &v, col)), vtv);
                for (c, &vi) in col.iter_mut().zip(&v) {
                    *c = fmt.sub(*c, fmt.mul(t, vi));
                }
            }
            let t = fmt.div(fmt.mul(2.0, dot(fmt, &v, &b[k..])), vtv);
            for (c, &vi) in b[k..].iter_mut().zip(&v) {
                *c = fmt.sub(*c, fmt.mul(t, vi));
            }
        }
        r.set(k, k, alpha);
    }

    let rmax = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let tol = (m.max(n) as f64) * u * rmax;
    if diag.iter().any(|d| d.abs() <= tol) {
        return None;
    }

    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s = fmt.sub(s, fmt.mul(r.at(i, j), y[j]));
        }
        y[i] = fmt.div(s, r.at(i, i));
    }
    Some(y)
}

/// Minimum-norm least-squares solution via one-sided Jacobi SVD in double.
pub(crate) fn min_norm_solve(a: &Block, rhs: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows, a.cols);
    let mut w = Block { rows: m, cols: n, data: a.data.clone() };
    let mut v = Block::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.col(p).iter().map(|x| x * x).sum();
                let beta: f64 = w.col(q).iter().map(|x| x * x).sum();
                let gamma: f64 = w.col(p).iter().zip(w.col(q)).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for blk in [&mut w, &mut v] {
                    for i in 0..blk.rows {
                        let (xp, xq) = (blk.at(i, p), blk.at(i, q));
                        blk.set(i, p, c * xp - s * xq);
                        blk.set(i, q, s * xp + c * xq);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| w.col(j).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let smax = sigma.iter().fold(0.0f64, |a, &b| a.max(b));
    let tol = (m.max(n) as f64) * f64::EPSILON * smax;
    let mut y = vec![0.0; n];
    for j in 0..n {
        if sigma[j] <= tol {
            continue;
        }
        // u_j = w_j / sigma_j; coefficient (u_j . rhs) / sigma_j
        let coef = w.col(j).iter().zip(rhs).map(|(x, r)| x * r).sum::<f64>() / (sigma[j] * sigma[j]);
        for i in 0..n {
            y[i] += coef * v.at(i, j);
        }
    }
    y
}
