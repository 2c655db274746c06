//! Condition numbers for reports. Dense, so only meant for desk-scale sizes.

use super::SparseMatrix;
use crate::dense::{DenseMatrix, Lu};
use crate::error::{Error, Result};

fn dense_inverse(a: &SparseMatrix) -> Result<DenseMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension("condition numbers need a square matrix".into()));
    }
    let lu = Lu::factor(a.to_dense::<f64>(), f64::EPSILON)?;
    Ok(lu.inverse())
}

/// `||A^{-1}||_inf ||A||_inf`.
pub fn kappa_inf(a: &SparseMatrix) -> Result<f64> {
    let inv = dense_inverse(a)?;
    Ok(inv.norm_inf() * a.norm_inf())
}

/// `cond_2(A^T) = || |A^{-T}| |A^T| ||_2`, estimated by power iteration on
/// the Gram matrix of the nonnegative product (never formed explicitly).
pub fn cond2_transpose(a: &SparseMatrix) -> Result<f64> {
    let n = a.n_rows();
    let inv = dense_inverse(a)?;
    let abs_a = a.map_values(f64::abs);
    let abs_at = abs_a.transpose();

    // C x = |A^{-T}| |A^T| x,   C^T w = |A| |A^{-1}| w
    let c_apply = |x: &[f64]| -> Vec<f64> {
        let y = abs_at.spmv(x);
        let mut z = vec![0.0; n];
        for (k, &yk) in y.iter().enumerate() {
            if yk == 0.0 {
                continue;
            }
            for (zi, v) in z.iter_mut().zip(inv.row(k)) {
                *zi += v.abs() * yk;
            }
        }
        z
    };
    let ct_apply = |w: &[f64]| -> Vec<f64> {
        let y: Vec<f64> = (0..n)
            .map(|i| inv.row(i).iter().zip(w).map(|(v, wj)| v.abs() * wj).sum())
            .collect();
        abs_a.spmv(&y)
    };

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let g = ct_apply(&c_apply(&x));
        let norm = super::vec_norm2(&g);
        if norm == 0.0 {
            return Err(Error::Singular("power iteration collapsed".into()));
        }
        let converged = (norm - lambda).abs() <= 1e-12 * norm;
        lambda = norm;
        x = g.into_iter().map(|v| v / norm).collect();
        if converged {
            break;
        }
    }
    Ok(lambda.sqrt())
}
