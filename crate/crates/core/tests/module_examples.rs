//! Worked examples per module, checked against independent oracles.

mod common;

use std::path::Path;

use bspai::bucketed::{c_from_row_occupancy, normwise_backward_error, storage_ratio_from_occupancy, CFormula};
use bspai::harness::{self, emit_table, ExperimentSpec, MatrixEntry, TableFormat};
use bspai::krylov::UniformPreconditioner;
use bspai::refine::{dd_matvec, reference_solution_dd, unit_rhs};
use bspai::sparsemat::{column_scale_transpose, kappa_inf, read_matrix_market, write_matrix_market};
use bspai::*;
use common::*;
use rand::Rng;

const U_D: f64 = f64::EPSILON / 2.0;

// ---- precision ----

#[test]
fn rounding_examples() {
    assert_eq!(round_to(1.0, FpFormat::Half), 1.0);
    assert_eq!(round_to(70000.0, FpFormat::Half), f64::INFINITY);
    assert_eq!(round_to(65504.0, FpFormat::Half), 65504.0);
    // just below the overflow midpoint 65520
    assert_eq!(round_to(65519.99, FpFormat::Half), 65504.0);
    for x in [3.7, -1e300, 1e-300] {
        assert_eq!(round_to(x, FpFormat::Drop), 0.0);
    }
}

#[test]
fn operation_examples() {
    let tiny = 2f64.powi(-12);
    assert_eq!(op_in(1.0, tiny, OpKind::Add, FpFormat::Half), 1.0);
    assert_eq!(op_in(1.0, 1.0, OpKind::Add, FpFormat::Double), 2.0);
    let s = op_in(DoubleDouble::ONE, DoubleDouble::from_f64(2f64.powi(-60)), OpKind::Add, FpFormat::Quad);
    assert_eq!((s.hi, s.lo), (1.0, 2f64.powi(-60)));
}

#[test]
fn unit_roundoffs() {
    assert_eq!(unit_roundoff(FpFormat::Half), 2f64.powi(-11));
    assert_eq!(unit_roundoff(FpFormat::Single), 2f64.powi(-24));
    assert_eq!(unit_roundoff(FpFormat::Double), 2f64.powi(-53));
    assert!(unit_roundoff(FpFormat::Quad) <= 2f64.powi(-104));
    assert_eq!(unit_roundoff(FpFormat::Drop), 1.0);
}

// ---- sparsemat ----

#[test]
fn matrix_market_one_by_one() {
    let text = "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 5.0\n";
    let a = read_matrix_market(text.as_bytes()).unwrap();
    assert_eq!(a, SparseMatrix::from_dense_rows(&[vec![5.0]]));
}

#[test]
fn matrix_market_symmetric_and_pattern() {
    let sym = "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2\n3 1 -1\n2 2 4\n";
    let a = read_matrix_market(sym.as_bytes()).unwrap();
    assert_eq!(a.nnz(), 4);
    assert_eq!(a.get(0, 2), -1.0);
    assert_eq!(a.get(2, 0), -1.0);
    let pat = "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n";
    let p = read_matrix_market(pat.as_bytes()).unwrap();
    assert_eq!(p.get(0, 1), 1.0);
    let dup = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n";
    let err = read_matrix_market(dup.as_bytes()).unwrap_err().to_string();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn column_scaling_examples() {
    let (b, d) = column_scale_transpose(&SparseMatrix::from_diagonal(&[2.0, 4.0])).unwrap();
    assert_eq!(b, SparseMatrix::identity(2));
    assert_eq!(d.as_slice(), &[0.5, 0.25]);
    let (b, d) = column_scale_transpose(&SparseMatrix::identity(3)).unwrap();
    assert_eq!(b, SparseMatrix::identity(3));
    assert_eq!(d.as_slice(), &[1.0; 3]);

    let mut r = rng(5);
    let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..5).map(|_| r.random_range(-3.0..3.0)).collect()).collect();
    let (b, _) = column_scale_transpose(&SparseMatrix::from_dense_rows(&rows)).unwrap();
    let bt = b.transpose();
    for j in 0..5 {
        let max = bt.row(j).1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(max, 1.0, "column {j}");
    }
    let zero_row = SparseMatrix::from_dense_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
    assert!(column_scale_transpose(&zero_row).is_err());
}

#[test]
fn uniform_spmv_examples() {
    let x = [0.3, -7.0, 1e-5];
    assert_eq!(spmv_uniform(&SparseMatrix::identity(3), &x, FpFormat::Half).unwrap(), x.map(|v| round_to(v, FpFormat::Half)));

    let a = SparseMatrix::from_dense_rows(&[vec![1.1, 0.0, 2.3], vec![-0.7, 3.3, 0.0], vec![0.01, 0.2, 5.5]]);
    assert_eq!(spmv_uniform(&a, &x, FpFormat::Double).unwrap(), a.spmv(&x));

    // scalar replay: round operands and every product and sum to fp16
    let h = |v: f64| half::f16::from_bits(f16_bits_reference(v)).to_f64();
    let want: Vec<f64> = (0..3)
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter().zip(vals).fold(0.0, |acc, (&j, &v)| h(acc + h(h(v) * h(x[j]))))
        })
        .collect();
    assert_eq!(spmv_uniform(&a, &x, FpFormat::Half).unwrap(), want);
    assert!(spmv_uniform(&a, &x[..2], FpFormat::Double).is_err());
}

#[test]
fn condition_number_examples() {
    assert_eq!(kappa_inf(&SparseMatrix::identity(4)).unwrap(), 1.0);
    assert!((kappa_inf(&SparseMatrix::from_diagonal(&[1.0, 10.0])).unwrap() - 10.0).abs() < 1e-12);
    let a = badly_scaled_tridiagonal(30, 1e4);
    let oracle = dense_norm_inf(&gauss_jordan_inverse(&a)) * a.norm_inf();
    let k = kappa_inf(&a).unwrap();
    assert!((k - oracle).abs() <= 1e-8 * oracle, "{k} vs {oracle}");
    assert!(kappa_inf(&SparseMatrix::from_dense_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]])).is_err());
}

// ---- spai ----

#[test]
fn spai_diagonal_and_identity() {
    let (m, rep) = spai_build(&SparseMatrix::identity(5), &SpaiConfig::default()).unwrap();
    assert_eq!(m, SparseMatrix::identity(5));
    assert!(rep.residual_norms.iter().all(|&r| r == 0.0));
    let d = [2.0, -4.0, 0.5];
    let (m, rep) = spai_build(&SparseMatrix::from_diagonal(&d), &SpaiConfig::default()).unwrap();
    assert_eq!(m, SparseMatrix::from_diagonal(&[0.5, -0.25, 2.0]));
    assert!(rep.residual_norms.iter().all(|&r| r == 0.0));
    let (m, _) = spai_right_preconditioner(&SparseMatrix::from_diagonal(&[2.0, 4.0]), &SpaiConfig::default()).unwrap();
    assert_eq!(m, SparseMatrix::from_diagonal(&[0.5, 0.25]));
}

#[test]
fn spai_zero_diagonal_is_rejected() {
    let a = SparseMatrix::from_dense_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    assert!(spai_build(&a, &SpaiConfig::default()).is_err());
    let cfg = SpaiConfig { initial_pattern: InitialPattern::PatternOfA, ..SpaiConfig::default() };
    let (m, _) = spai_build(&a, &cfg).unwrap();
    assert_eq!(m, a);
}

/// Least squares `min ||e_k - A(:, J) y||_2` through the normal equations,
/// with the Gram matrix formed by the accurate dot product.
fn dense_least_squares(a: &SparseMatrix, pattern: &[usize], k: usize) -> Vec<f64> {
    let cols: Vec<Vec<f64>> = pattern.iter().map(|&j| (0..a.n_rows()).map(|i| a.get(i, j)).collect()).collect();
    let m = pattern.len();
    let mut g: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            let mut row: Vec<f64> =
                (0..m).map(|c| accurate_dot(cols[r].iter().copied().zip(cols[c].iter().copied()))).collect();
            row.push(cols[r][k]);
            row
        })
        .collect();
    for p in 0..m {
        let piv = (p..m).max_by(|&x, &y| g[x][p].abs().total_cmp(&g[y][p].abs())).unwrap();
        g.swap(p, piv);
        for r in p + 1..m {
            let f = g[r][p] / g[p][p];
            for c in p..=m {
                g[r][c] -= f * g[p][c];
            }
        }
    }
    let mut y = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| g[r][c] * y[c]).sum();
        y[r] = (g[r][m] - s) / g[r][r];
    }
    y
}

#[test]
fn spai_column_matches_dense_least_squares() {
    let mut r = rng(11);
    let a = random_dominant(&mut r, 8, 0.6);
    let cfg = SpaiConfig { eps_tol: 1e-6, alpha: 2, beta: 2, ..SpaiConfig::default() };
    let (m, _) = spai_build(&a, &cfg).unwrap();
    let mt = m.transpose();
    for k in 0..8 {
        let (pattern, values) = mt.row(k);
        let y = dense_least_squares(&a, pattern, k);
        let scale = values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for (got, want) in values.iter().zip(&y) {
            assert!((got - want).abs() <= 1e-12 * scale, "column {k}: {got} vs {want}");
        }
    }
}

// ---- bucketed ----

#[test]
fn single_bucket_keeps_everything() {
    let mut r = rng(2);
    let a = random_sparse(&mut r, 12, 0.3, 8.0);
    let m = build_buckets(&a, &BucketScheme::uniform(FpFormat::Single)).unwrap();
    assert_eq!(m.occupancy(), vec![a.nnz()]);
    assert_eq!(m.to_sparse(), a.map_values(|v| round_to(v, FpFormat::Single)));
    assert_eq!(m.storage_ratio(), 1.0);
    let p = (0..12).map(|i| a.row_nnz(i)).max().unwrap() as f64;
    let u = unit_roundoff(FpFormat::Single);
    assert_eq!(m.c_constant(), 1.0 + p * p * (1.0 + u) * (1.0 + u));
}

#[test]
fn c_constant_examples() {
    let u = [2f64.powi(-53), 2f64.powi(-24)];
    let sq = |x: f64| x * x;
    let row0 = 9.0 * sq(1.0 + u[0]) + 4.0 * sq(1.0 + u[1]);
    let row1 = sq(1.0 + u[0]) + sq(1.0 + u[1]);
    let want = (1.0 + u[0]) + row0.max(row1);
    let got = c_from_row_occupancy(vec![vec![3, 2], vec![1, 1]], &u, CFormula::Printed);
    assert_eq!(got, want);
    let unsq = c_from_row_occupancy(vec![vec![3, 2], vec![1, 1]], &u, CFormula::Unsquared);
    assert_eq!(unsq, (1.0 + u[0]) + 3.0 * sq(1.0 + u[0]) + 2.0 * sq(1.0 + u[1]));
    // no rows at all
    assert_eq!(c_from_row_occupancy(Vec::<Vec<usize>>::new(), &u, CFormula::Printed), 1.0 + u[0]);
}

#[test]
fn storage_ratio_examples() {
    let f = [FpFormat::Double, FpFormat::Single, FpFormat::Half, FpFormat::Drop];
    let r = storage_ratio_from_occupancy(&[556, 537, 12, 0], &f);
    assert!((r - (556.0 * 64.0 + 537.0 * 32.0 + 12.0 * 16.0) / (1105.0 * 64.0)).abs() < 1e-15);
    assert!((100.0 * r - 74.9).abs() < 0.05);
    let r = storage_ratio_from_occupancy(&[242, 284, 347, 232], &f);
    assert!((100.0 * r - 42.6).abs() < 0.05);
    assert_eq!(storage_ratio_from_occupancy(&[17, 0, 0, 0], &f), 1.0);
}

#[test]
fn zero_entry_lands_in_last_bucket() {
    let scheme = BucketScheme::new(vec![FpFormat::Double, FpFormat::Single, FpFormat::Drop], 2f64.powi(-30), BucketNorm::MaxAbs).unwrap();
    let t = scheme.thresholds(1.0);
    assert_eq!(scheme.classify(0.0, &t), 2);
    assert_eq!(scheme.classify(1.0, &t), 0);
}

#[test]
fn bspmv_examples() {
    let mut r = rng(3);
    let a = random_sparse(&mut r, 10, 0.5, 12.0);
    let scheme = BucketScheme::new(vec![FpFormat::Double, FpFormat::Single, FpFormat::Half], 2f64.powi(-37), BucketNorm::MaxAbs).unwrap();
    let m = build_buckets(&a, &scheme).unwrap();
    assert_eq!(bspmv(&m, &[0.0; 10]).unwrap(), vec![0.0; 10]);

    let single = build_buckets(&a, &BucketScheme::uniform(FpFormat::Double)).unwrap();
    let x: Vec<f64> = (0..10).map(|_| r.random_range(-1.0..1.0)).collect();
    assert_eq!(bspmv(&single, &x).unwrap(), spmv_uniform(&a, &x, FpFormat::Double).unwrap());

    let bound = m.error_bound(CFormula::Printed);
    for _ in 0..200 {
        let x: Vec<f64> = (0..10).map(|_| r.random_range(-1.0..1.0)).collect();
        let y = bspmv(&m, &x).unwrap();
        let e = oracle_backward_error(&a, &x, &y);
        assert!(e <= bound, "{e} > {bound}");
    }
}

#[test]
fn backward_error_examples() {
    let a = SparseMatrix::from_dense_rows(&[vec![2.0, -1.0], vec![0.5, 3.0]]);
    let x = [0.25, -1.5];
    let exact = accurate_spmv(&a, &x);
    assert_eq!(normwise_backward_error(&a, &x, &exact).unwrap(), 0.0);
    let delta = 2f64.powi(-20);
    let mut y = exact.clone();
    y[0] += delta;
    let want = delta / (3.5 * 1.5);
    assert!((normwise_backward_error(&a, &x, &y).unwrap() - want).abs() <= 1e-15 * want);
    assert!(normwise_backward_error(&a, &[0.0, 0.0], &exact).is_err());

    // a uniform single-precision product stays within p u
    let mut r = rng(9);
    let a = random_sparse(&mut r, 40, 0.2, 4.0);
    let p = a.max_row_nnz() as f64;
    let xs: Vec<f64> = (0..40).map(|_| round_to(r.random_range(-1.0..1.0), FpFormat::Single)).collect();
    let a_s = a.map_values(|v| round_to(v, FpFormat::Single));
    let y = spmv_uniform(&a_s, &xs, FpFormat::Single).unwrap();
    assert!(normwise_backward_error(&a_s, &xs, &y).unwrap() <= p * unit_roundoff(FpFormat::Single));
}

// ---- krylov ----

#[test]
fn gmres_identity() {
    let a = SparseMatrix::identity(6);
    let m = build_buckets(&a, &BucketScheme::uniform(FpFormat::Double)).unwrap();
    let r = [1.0, -2.0, 0.5, 3.0, 0.0, 7.0];
    let res = gmres_left(&a, &m, &r, &GmresConfig::new(1e-10, 6, FpFormat::Double)).unwrap();
    assert_eq!(res.iterations, 1);
    assert!(res.converged);
    for (d, b) in res.d.iter().zip(&r) {
        assert!((d - b).abs() <= 4.0 * U_D * b.abs());
    }
}

#[test]
fn gmres_with_exact_inverse() {
    let mut r = rng(4);
    let a = random_dominant(&mut r, 7, 0.8);
    let inv = gauss_jordan_inverse(&a);
    let m = build_buckets(&SparseMatrix::from_dense_rows(&inv), &BucketScheme::uniform(FpFormat::Double)).unwrap();
    let rhs: Vec<f64> = (0..7).map(|_| r.random_range(-1.0..1.0)).collect();
    let res = gmres_left(&a, &m, &rhs, &GmresConfig::new(1e-12, 7, FpFormat::Double)).unwrap();
    assert!(res.iterations <= 2, "{} iterations", res.iterations);
    let want: Vec<f64> = inv.iter().map(|row| accurate_dot(row.iter().copied().zip(rhs.iter().copied()))).collect();
    let scale = want.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for (d, w) in res.d.iter().zip(&want) {
        assert!((d - w).abs() <= 1e-12 * scale, "{d} vs {w}");
    }
}

#[test]
fn gmres_against_dense_solution() {
    let a = convection_diffusion(6, 20.0);
    let mut r = rng(6);
    let rhs: Vec<f64> = (0..36).map(|_| r.random_range(-1.0..1.0)).collect();
    let id = SparseMatrix::identity(36);
    let pre = UniformPreconditioner { matrix: &id, fmt: FpFormat::Double };
    let res = gmres_left(&a, &pre, &rhs, &GmresConfig::new(1e-12, 36, FpFormat::Double)).unwrap();
    assert!(res.converged);
    let inv = gauss_jordan_inverse(&a);
    let want: Vec<f64> = inv.iter().map(|row| accurate_dot(row.iter().copied().zip(rhs.iter().copied()))).collect();
    let err = res.d.iter().zip(&want).map(|(d, w)| (d - w).abs()).fold(0.0, f64::max);
    let scale = want.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    assert!(err <= 1e-9 * scale, "{err}");
    // the Arnoldi estimate agrees with the true preconditioned residual
    let ad = accurate_spmv(&a, &res.d);
    let true_res = rhs.iter().zip(&ad).map(|(b, v)| (b - v) * (b - v)).sum::<f64>().sqrt();
    let rel = true_res / rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let est = *res.residual_history.last().unwrap();
    assert!((rel - est).abs() <= 1e-6 * rel.max(1e-12) + 1e-14, "{rel} vs {est}");
}

// ---- refine ----

#[test]
fn reference_solution_examples() {
    let b = [0.5, -2.0, 3.0];
    assert_eq!(reference_solution(&SparseMatrix::identity(3), &b).unwrap(), b.to_vec());
    assert_eq!(reference_solution(&SparseMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    assert!(reference_solution(&SparseMatrix::from_dense_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]), &[1.0, 1.0]).is_err());

    let mut r = rng(20);
    let a = random_dominant(&mut r, 20, 0.5);
    let b: Vec<f64> = (0..20).map(|_| r.random_range(-1.0..1.0)).collect();
    let x = reference_solution_dd(&a, &b).unwrap();
    let ax = dd_matvec(&a, &x);
    let res = ax
        .iter()
        .zip(&b)
        .map(|(&v, &bi)| (v - DoubleDouble::from_f64(bi)).to_f64().abs())
        .fold(0.0, f64::max);
    let nb = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(res / nb <= 1e-30, "{}", res / nb);
}

#[test]
fn refinement_on_identity_stops_immediately() {
    let a = SparseMatrix::identity(5);
    let b = unit_rhs(5, FpFormat::Double);
    for t in [PrecisionTuple::Ddq, PrecisionTuple::Sdq, PrecisionTuple::Ssd] {
        let rep = bspai_gmres_ir(&a, &b, &IrConfig::for_tuple(t, 0.1, t.working().unit_roundoff())).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.steps(), 0);
        assert_eq!(rep.solution, b.iter().map(|&v| round_to(v, t.working())).collect::<Vec<_>>());
    }
}

#[test]
fn refinement_converges_on_convection_diffusion() {
    let a = convection_diffusion(8, 10.0);
    let b = unit_rhs(64, FpFormat::Double);
    let mut cfg = IrConfig::for_tuple(PrecisionTuple::Ddq, 0.3, 2f64.powi(-53));
    cfg.diagnostics = true;
    let rep = bspai_gmres_ir(&a, &b, &cfg).unwrap();
    assert!(rep.converged);
    let fe = *rep.forward_errors.last().unwrap();
    let be = *rep.backward_errors.last().unwrap();
    assert!(fe <= rep.threshold && be <= rep.threshold);
    assert_eq!(rep.total_gmres_iterations, rep.gmres_iterations.iter().sum::<usize>());
    assert!(rep.steps() <= cfg.i_max);
    // independent check of the reported backward error
    let x = &rep.solution;
    let num = (0..64)
        .map(|i| {
            let (cols, vals) = a.row(i);
            let terms = cols.iter().zip(vals).map(|(&j, &v)| (v, x[j])).chain([(b[i], -1.0)]);
            accurate_dot(terms).abs()
        })
        .fold(0.0, f64::max);
    let nx = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let nb = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let want = num / (a.norm_inf() * nx + nb);
    assert!((be - want).abs() <= 1e-3 * want.max(1e-300));
}

// ---- harness ----

fn spec_for(eps_b: &str) -> ExperimentSpec {
    let text = format!("precision = \"ddq\"\neps_b = [{eps_b}]\n");
    ExperimentSpec::from_toml_str(&text, Path::new(".")).unwrap()
}

#[test]
fn harness_row_shape() {
    let spec = spec_for("\"2^-53\", \"2^-37\"");
    let a = badly_scaled_tridiagonal(37, 1e3);
    let entry = MatrixEntry { name: "tri37".into(), path: "unused.mtx".into(), spai_eps: 0.1 };
    let rows = harness::run_matrix(&spec, &entry, &a).rows();
    assert_eq!(rows.len(), 3);
    let labels: Vec<_> = rows.iter().map(|r| r.preconditioner.as_str()).collect();
    assert_eq!(labels, ["SPAI", "BSPAI(2^-53)", "BSPAI(2^-37)"]);
    assert_eq!(rows[0].occupancy.len(), 1);
    assert_eq!(rows[0].storage_percent, 100.0);
    for r in &rows {
        assert!(r.error.is_none(), "{:?}", r.error);
        assert_eq!(r.occupancy.iter().sum::<usize>(), r.nnz);
        assert!(r.storage_percent > 0.0 && r.storage_percent <= 100.0);
        assert!(r.converged);
    }
    assert_eq!(rows[1].occupancy.len(), 4);
    let (k0, k1) = (rows[0].kappa_ma.unwrap(), rows[1].kappa_ma.unwrap());
    assert!((k0 - k1).abs() <= 0.01 * k0);
}

#[test]
fn harness_boundary_and_empty() {
    let spec = spec_for("\"2^-53\"");
    assert!(harness::run_experiment(&spec).is_empty());
    let entry = MatrixEntry { name: "cd".into(), path: "unused.mtx".into(), spai_eps: 0.3 };
    let rows = harness::run_matrix(&spec, &entry, &convection_diffusion(5, 5.0)).rows();
    assert!(rows.iter().all(|r| r.error.is_none()));
}

#[test]
fn harness_records_missing_files_in_rows() {
    let text = "precision = \"ssd\"\neps_b = [\"2^-24\"]\n[[matrix]]\nname = \"nope\"\npath = \"does/not/exist.mtx\"\nspai_eps = 0.1\n";
    let spec = ExperimentSpec::from_toml_str(text, Path::new(".")).unwrap();
    let rows = harness::run_experiment(&spec);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.error.is_some() && !r.converged));
}

#[test]
fn spec_files_drive_the_harness() {
    let dir = std::env::temp_dir().join(format!("bspai-examples-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = convection_diffusion(4, 2.0);
    write_matrix_market(&a, std::fs::File::create(dir.join("cd16.mtx")).unwrap()).unwrap();
    std::fs::write(
        dir.join("spec.toml"),
        "precision = \"ddq\"\neps_b = [\"2^-40\"]\ncorpus = \".\"\n[[matrix]]\nname = \"cd16\"\nspai_eps = 0.2\n",
    )
    .unwrap();
    let mut spec = ExperimentSpec::from_file(dir.join("spec.toml")).unwrap();
    spec.matrices[0].path = dir.join("cd16.mtx");
    let first = emit_table(&harness::run_experiment(&spec), TableFormat::Csv).unwrap();
    let second = emit_table(&harness::run_experiment(&spec), TableFormat::Csv).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}
