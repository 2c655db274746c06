//! Randomized checks of the error bounds and degeneracies, run by the
//! `verify --bounds` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bucketed::{
    bspmv, build_buckets, normwise_backward_error, storage_ratio_from_occupancy, BucketNorm, BucketScheme,
};
use crate::precision::{DoubleDouble, FpFormat};
use crate::sparsemat::{spmv_uniform, SparseMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.into(), passed, detail }
}

/// Square matrix with a full diagonal, roughly `density * n` extra entries
/// per row, and magnitudes spread over `decades` powers of ten.
pub fn random_sparse<R: Rng>(rng: &mut R, n: usize, density: f64, decades: f64) -> SparseMatrix {
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
    SparseMatrix::from_triplets(n, n, &trip).expect("generated coordinates are unique")
}

/// Random vector with unit 2-norm.
pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Storage percentages of the occupancy tuples published for steam1 and
/// steam3.
pub fn check_storage_ratios() -> CheckOutcome {
    let ladder = [FpFormat::Double, FpFormat::Single, FpFormat::Half, FpFormat::Drop];
    let cases: [([usize; 4], f64); 4] = [
        ([556, 537, 12, 0], 74.9),
        ([242, 284, 347, 232], 42.6),
        ([248, 83, 14, 2], 84.4),
        ([139, 85, 92, 31], 59.0),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (occ, want) in cases {
        let got = 100.0 * storage_ratio_from_occupancy(&occ, &ladder);
        worst = worst.max((got - want).abs());
        detail.push(format!("{occ:?} -> {got:.2}%"));
    }
    outcome("storage ratio of published occupancies", worst <= 0.1, detail.join("; "))
}

/// Measured backward error of the bucketed product against
/// `(q-1) u_1 + c eps` on random matrices and vectors.
pub fn check_bucketed_bound(seed: u64, matrices: usize, vectors: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ladder = vec![FpFormat::Double, FpFormat::Single, FpFormat::Half, FpFormat::Drop];
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for t in 0..matrices {
        let n = rng.random_range(5..40);
        let a = random_sparse(&mut rng, n, 0.2, 14.0);
        let eps = [2f64.powi(-53), 2f64.powi(-37), 2f64.powi(-24)][t % 3];
        let norm = if t % 2 == 0 { BucketNorm::MaxAbs } else { BucketNorm::Inf };
        let m = build_buckets(&a, &BucketScheme::new(ladder.clone(), eps, norm).unwrap()).unwrap();
        let bound = m.error_bound(Default::default());
        for _ in 0..vectors {
            let x = random_unit(&mut rng, n);
            let y = bspmv(&m, &x).unwrap();
            let err = normwise_backward_error(&a, &x, &y).unwrap();
            worst_ratio = worst_ratio.max(err / bound);
            if err > bound {
                violations += 1;
            }
        }
    }
    outcome(
        "bucketed product backward error bound",
        violations == 0,
        format!("{violations} violations, worst error/bound {worst_ratio:.3e}"),
    )
}

/// Uniform products in single and half stay below `p u`.
pub fn check_uniform_bound(seed: u64, matrices: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for t in 0..matrices {
        let fmt = if t % 2 == 0 { FpFormat::Single } else { FpFormat::Half };
        let n = rng.random_range(2..30);
        // modest dynamic range keeps half away from underflow
        let a = random_sparse(&mut rng, n, 0.3, 2.0).map_values(|v| fmt.round(v));
        let x: Vec<f64> = random_unit(&mut rng, n).into_iter().map(|v| fmt.round(v)).collect();
        let y = spmv_uniform(&a, &x, fmt).unwrap();
        let bound = a.max_row_nnz() as f64 * fmt.unit_roundoff();
        let err = normwise_backward_error(&a, &x, &y).unwrap();
        worst_ratio = worst_ratio.max(err / bound);
        if err > bound {
            violations += 1;
        }
    }
    outcome(
        "uniform product backward error bound",
        violations == 0,
        format!("{violations} violations, worst error/bound {worst_ratio:.3e}"),
    )
}

/// One bucket reproduces the uniform product bit for bit.
pub fn check_single_bucket_identity(seed: u64, matrices: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for t in 0..matrices {
        let fmt = [FpFormat::Double, FpFormat::Single, FpFormat::Half][t % 3];
        let n = rng.random_range(1..30);
        let a = random_sparse(&mut rng, n, 0.3, 4.0);
        let x = random_unit(&mut rng, n);
        let m = build_buckets(&a, &BucketScheme::uniform(fmt)).unwrap();
        let y1 = bspmv(&m, &x).unwrap();
        let y2 = spmv_uniform(&a, &x, fmt).unwrap();
        if y1.iter().zip(&y2).any(|(p, q)| p.to_bits() != q.to_bits()) {
            mismatches += 1;
        }
    }
    outcome("single bucket equals uniform product", mismatches == 0, format!("{mismatches} mismatches"))
}

/// Double-double sums and products of doubles are exact.
pub fn check_double_double(seed: u64, trials: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let a = (rng.random::<f64>() - 0.5) * 2f64.powi(rng.random_range(-40..40));
        let b = (rng.random::<f64>() - 0.5) * 2f64.powi(rng.random_range(-40..40));
        let s = DoubleDouble::sum_exact(a, b);
        // (a + b) - a - b vanishes when the pair carries the sum exactly
        let back = s - DoubleDouble::from_f64(a) - DoubleDouble::from_f64(b);
        let p = DoubleDouble::prod_exact(a, b);
        if back.to_f64() != 0.0 || p.lo != a.mul_add(b, -p.hi) {
            failures += 1;
        }
    }
    outcome("double-double exactness", failures == 0, format!("{failures} failures in {trials} trials"))
}

/// Every check, at the given scale (`1` runs 10^3 vectors / matrices).
pub fn run_bound_checks(seed: u64, scale: usize) -> Vec<CheckOutcome> {
    let scale = scale.max(1);
    vec![
        check_storage_ratios(),
        check_bucketed_bound(seed, 10 * scale, 100),
        check_uniform_bound(seed ^ 1, 1000 * scale),
        check_single_bucket_identity(seed ^ 2, 300 * scale),
        check_double_double(seed ^ 3, 100_000 * scale),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_checks_pass() {
        for c in [
            check_storage_ratios(),
            check_bucketed_bound(7, 3, 20),
            check_uniform_bound(7, 50),
            check_single_bucket_identity(7, 30),
            check_double_double(7, 1000),
        ] {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
