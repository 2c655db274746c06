//! Small dense kernels used for reporting and reference solutions: LU with
//! partial pivoting over `f64` or double-double.

use std::ops::{Add, Div, Mul, Neg, Sub};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::precision::DoubleDouble;

pub trait Field:
    Copy
    + Send
    + Sync
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
}

impl Field for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn from_f64(x: f64) -> f64 {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Field for DoubleDouble {
    const ZERO: DoubleDouble = DoubleDouble::ZERO;
    const ONE: DoubleDouble = DoubleDouble::ONE;
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<T>,
}

impl<T: Field> DenseMatrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix { n_rows, n_cols, data: vec![T::ZERO; n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::ONE;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).iter().map(|v| v.abs().to_f64()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n_rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }
}

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    factors: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Field> Lu<T> {
    /// Factors a square matrix. A pivot whose magnitude is at most
    /// `singular_tol * max|a_ij|` is reported as singular.
    pub fn factor(a: DenseMatrix<T>, singular_tol: f64) -> Result<Self> {
        if a.n_rows != a.n_cols {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.n_rows, a.n_cols
            )));
        }
        let n = a.n_rows;
        let scale = a.data.iter().map(|v| v.abs().to_f64()).fold(0.0, f64::max);
        let tol = singular_tol * scale;
        let mut f = a.data;
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let mut p = k;
            let mut best = f[k * n + k].abs();
            for i in k + 1..n {
                let v = f[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            let best = best.to_f64();
            if !(best > tol) || !best.is_finite() {
                return Err(Error::Singular(format!("pivot {k} has magnitude {best:e}")));
            }
            if p != k {
                for j in 0..n {
                    f.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (top, rest) = f.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..];
            let pivot = pivot_row[k];
            rest.par_chunks_mut(n).for_each(|row| {
                let l = row[k] / pivot;
                row[k] = l;
                if l.to_f64() != 0.0 {
                    for j in k + 1..n {
                        row[j] = row[j] - l * pivot_row[j];
                    }
                }
            });
        }
        Ok(Lu { n, factors: f, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.factors[i * n..i * n + i];
            let mut s = y[i];
            for (j, &l) in row.iter().enumerate() {
                s = s - l * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let row = &self.factors[i * n..(i + 1) * n];
            let mut s = y[i];
            for j in i + 1..n {
                s = s - row[j] * y[j];
            }
            y[i] = s / row[i];
        }
        y
    }

    /// Dense inverse, computed column by column.
    pub fn inverse(&self) -> DenseMatrix<T> {
        let n = self.n;
        let cols: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![T::ZERO; n];
                e[j] = T::ONE;
                self.solve(&e)
            })
            .collect();
        let mut inv = DenseMatrix::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }
}
