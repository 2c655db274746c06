//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use bspai::SparseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Error-free sum of two doubles, written independently of the library.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Dot product carried in a (hi, lo) pair with exact products. Accurate to
/// about 2^-100 relative to the sum of |terms|, which is far below every
/// tolerance it is used against.
pub fn accurate_dot(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (a, b) in terms {
        let p = a * b;
        let pe = a.mul_add(b, -p);
        let (s, e) = two_sum(hi, p);
        hi = s;
        lo += e + pe;
    }
    hi + lo
}

pub fn accurate_spmv(a: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.n_rows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            accurate_dot(cols.iter().zip(vals).map(|(&j, &v)| (v, x[j])))
        })
        .collect()
}

/// `||y - A x||_inf / (||A||_inf ||x||_inf)` with the oracle product.
pub fn oracle_backward_error(a: &SparseMatrix, x: &[f64], y: &[f64]) -> f64 {
    let exact = accurate_spmv(a, x);
    let num = exact.iter().zip(y).map(|(e, v)| (e - v).abs()).fold(0.0, f64::max);
    let na = (0..a.n_rows()).map(|i| a.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let nx = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    num / (na * nx)
}

/// Square matrix with a nonzero diagonal, `density` off-diagonal fill and
/// magnitudes spread over `decades` powers of ten.
pub fn random_sparse(rng: &mut ChaCha8Rng, n: usize, density: f64, decades: f64) -> SparseMatrix {
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || rng.random::<f64>() < density {
                let mag = 10f64.powf(-decades * rng.random::<f64>());
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                trip.push((i, j, sign * mag));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).unwrap()
}

/// Diagonally dominant version of `random_sparse`, so it is safely
/// nonsingular.
pub fn random_dominant(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparseMatrix {
    let a = random_sparse(rng, n, density, 3.0);
    let mut trip = Vec::new();
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let off: f64 = cols.iter().zip(vals).filter(|(&j, _)| j != i).map(|(_, v)| v.abs()).sum();
        for (&j, &v) in cols.iter().zip(vals) {
            trip.push((i, j, if j == i { v.signum() * (off + 1.0) } else { v }));
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).unwrap()
}

/// Upwinded 2D convection-diffusion on an `m x m` grid.
pub fn convection_diffusion(m: usize, peclet: f64) -> SparseMatrix {
    let h = 1.0 / (m as f64 + 1.0);
    let mut trip = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let k = i * m + j;
            trip.push((k, k, 4.0 + peclet * h));
            let nb = [
                (i.wrapping_sub(1), j, -1.0 - peclet * h),
                (i + 1, j, -1.0),
                (i, j.wrapping_sub(1), -1.0),
                (i, j + 1, -1.0),
            ];
            for (ii, jj, v) in nb {
                if ii < m && jj < m {
                    trip.push((k, ii * m + jj, v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(m * m, m * m, &trip).unwrap()
}

/// Tridiagonal matrix with badly scaled rows, a stand-in for the
/// ill-conditioned engineering matrices.
pub fn badly_scaled_tridiagonal(n: usize, spread: f64) -> SparseMatrix {
    let mut trip = Vec::new();
    for i in 0..n {
        let s = spread.powf(i as f64 / (n - 1) as f64);
        trip.push((i, i, 3.0 * s));
        if i + 1 < n {
            trip.push((i, i + 1, -1.0 * s));
        }
        if i > 0 {
            trip.push((i, i - 1, -1.2 * s));
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).unwrap()
}

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &SparseMatrix) -> Vec<Vec<f64>> {
    let n = a.n_rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; 2 * n];
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
            row[n + i] = 1.0;
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| m[x][k].abs().total_cmp(&m[y][k].abs())).unwrap();
        m.swap(k, p);
        let piv = m[k][k];
        assert!(piv != 0.0, "singular test matrix");
        for v in m[k].iter_mut() {
            *v /= piv;
        }
        for i in 0..n {
            if i != k && m[i][k] != 0.0 {
                let f = m[i][k];
                let pivot_row = m[k].clone();
                for (v, pv) in m[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn dense_norm_inf(rows: &[Vec<f64>]) -> f64 {
    rows.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Binary16 bits of `x` under round-to-nearest-even, computed directly
/// from the binary64 fields.
pub fn f16_bits_reference(x: f64) -> u16 {
    let b = x.to_bits();
    let sign = ((b >> 48) & 0x8000) as u16;
    let exp = ((b >> 52) & 0x7ff) as i32;
    let man = b & ((1u64 << 52) - 1);
    if exp == 0x7ff {
        return sign | 0x7c00 | if man != 0 { 0x200 } else { 0 };
    }
    if exp == 0 {
        return sign;
    }
    let e = exp - 1023;
    if e > 15 {
        return sign | 0x7c00;
    }
    let sig = man | (1u64 << 52);
    let shift = if e >= -14 { 42 } else { 42 + (-14 - e) } as u32;
    if shift >= 54 {
        return sign;
    }
    let half = 1u64 << (shift - 1);
    let rem = sig & ((1u64 << shift) - 1);
    let mut q = sig >> shift;
    if rem > half || (rem == half && q & 1 == 1) {
        q += 1;
    }
    let bits = if e >= -14 { (((e + 15) as u64) << 10) + q - 1024 } else { q };
    sign | bits.min(0x7c00) as u16
}
