//! Five-precision GMRES-based iterative refinement with a bucketed sparse
//! approximate inverse as left preconditioner.
//!
//! Precisions: `fmt_f` builds the preconditioner and the initial guess,
//! `fmt_w` holds the iterate, `fmt_r` computes residuals, `fmt_g` runs GMRES
//! and `fmt_p` applies `A` inside GMRES.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bucketed::{bspmv, build_buckets, BucketScheme, BucketedMatrix, CFormula};
use crate::dense::Lu;
use crate::error::{Error, Result};
use crate::krylov::{gmres_left, GmresConfig, Preconditioner, UniformPreconditioner};
use crate::precision::{DoubleDouble, FpFormat};
use crate::spai::{spai_right_preconditioner, SpaiConfig, SpaiReport};
use crate::sparsemat::{kappa_inf, vec_norm_inf, SparseMatrix};

/// The `(u_f, u, u_r)` settings used in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionTuple {
    /// double, double, quad
    Ddq,
    /// single, double, quad
    Sdq,
    /// single, single, double
    Ssd,
}

impl PrecisionTuple {
    pub fn formats(self) -> (FpFormat, FpFormat, FpFormat) {
        use FpFormat::*;
        match self {
            PrecisionTuple::Ddq => (Double, Double, Quad),
            PrecisionTuple::Sdq => (Single, Double, Quad),
            PrecisionTuple::Ssd => (Single, Single, Double),
        }
    }

    pub fn working(self) -> FpFormat {
        self.formats().1
    }

    /// GMRES tolerance: `1e-8` with double working precision, `1e-4` with
    /// single.
    pub fn gmres_tol(self) -> f64 {
        match self.working() {
            FpFormat::Single => 1e-4,
            _ => 1e-8,
        }
    }

    /// Bucket precisions, starting at the working precision and ending with
    /// the drop format.
    pub fn ladder(self) -> Vec<FpFormat> {
        use FpFormat::*;
        match self.working() {
            Single => vec![Single, Half, Drop],
            _ => vec![Double, Single, Half, Drop],
        }
    }
}

impl fmt::Display for PrecisionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecisionTuple::Ddq => "ddq",
            PrecisionTuple::Sdq => "sdq",
            PrecisionTuple::Ssd => "ssd",
        })
    }
}

impl FromStr for PrecisionTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ddq" => Ok(PrecisionTuple::Ddq),
            "sdq" => Ok(PrecisionTuple::Sdq),
            "ssd" => Ok(PrecisionTuple::Ssd),
            other => Err(Error::Config(format!("unknown precision setting `{other}` (expected ddq, sdq or ssd)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrConfig {
    pub fmt_f: FpFormat,
    pub fmt_w: FpFormat,
    pub fmt_r: FpFormat,
    pub fmt_g: FpFormat,
    pub fmt_p: FpFormat,
    /// GMRES relative tolerance.
    pub tol: f64,
    pub i_max: usize,
    pub spai: SpaiConfig,
    pub bucket: BucketScheme,
    /// Stopping threshold as a multiple of the working unit roundoff.
    /// `None` means `max(10, sqrt(n))`.
    pub theta: Option<f64>,
    /// Stop after this many consecutive increases of the forward error.
    pub divergence_steps: usize,
    /// Also compute `kappa_inf(MA)` and per-solve GMRES backward errors.
    /// These need dense inverses, so they cost `O(n^3)`.
    pub diagnostics: bool,
}

impl IrConfig {
    /// Settings for a precision tuple with SPAI tolerance `spai_eps` and
    /// bucket target `eps_b` over the tuple's ladder.
    pub fn for_tuple(t: PrecisionTuple, spai_eps: f64, eps_b: f64) -> Self {
        let (f, w, r) = t.formats();
        IrConfig {
            fmt_f: f,
            fmt_w: w,
            fmt_r: r,
            fmt_g: w,
            fmt_p: w,
            tol: t.gmres_tol(),
            i_max: 10,
            spai: SpaiConfig { eps_tol: spai_eps, alpha: usize::MAX, build_fmt: f, ..SpaiConfig::default() },
            bucket: BucketScheme { precisions: t.ladder(), eps_target: eps_b, norm: Default::default() },
            theta: None,
            divergence_steps: 2,
            diagnostics: false,
        }
    }

    /// The same settings with a single bucket in the working precision.
    pub fn uniform(&self) -> Self {
        IrConfig { bucket: BucketScheme::uniform(self.fmt_w), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let (uf, u, ur) = (self.fmt_f.unit_roundoff(), self.fmt_w.unit_roundoff(), self.fmt_r.unit_roundoff());
        if !(uf >= u && u >= ur) {
            return Err(Error::Config(format!(
                "precisions must satisfy u_f >= u >= u_r, got ({}, {}, {})",
                self.fmt_f, self.fmt_w, self.fmt_r
            )));
        }
        if [self.fmt_f, self.fmt_w, self.fmt_r, self.fmt_g, self.fmt_p].contains(&FpFormat::Drop) {
            return Err(Error::Config("the drop format is only valid as a bucket".into()));
        }
        if self.i_max == 0 {
            return Err(Error::Config("i_max must be at least 1".into()));
        }
        if let Some(t) = self.theta {
            if !(t > 0.0) {
                return Err(Error::Config(format!("theta must be positive, got {t}")));
            }
        }
        self.spai.validate()?;
        self.bucket.validate()?;
        GmresConfig::new(self.tol, 1, self.fmt_g).validate()
    }

    pub fn threshold(&self, n: usize) -> f64 {
        self.theta.unwrap_or_else(|| (n as f64).sqrt().max(10.0)) * self.fmt_w.unit_roundoff()
    }
}

/// Outcome of one refinement run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrReport {
    pub n: usize,
    pub converged: bool,
    /// GMRES iterations of each correction solve.
    pub gmres_iterations: Vec<usize>,
    pub gmres_converged: Vec<bool>,
    /// `||x_i - x_ref||_inf / ||x_ref||_inf`, starting with the initial guess.
    pub forward_errors: Vec<f64>,
    /// `||b - A x_i||_inf / (||A||_inf ||x_i||_inf + ||b||_inf)`, same indexing.
    pub backward_errors: Vec<f64>,
    pub threshold: f64,
    pub total_gmres_iterations: usize,
    pub preconditioner_nnz: usize,
    pub occupancy: Vec<usize>,
    pub storage_ratio: f64,
    pub c_constant: f64,
    pub kappa_ma: Option<f64>,
    pub kappa_m: Option<f64>,
    /// Normwise backward error of each GMRES solve of the preconditioned
    /// system, `||s - MA d||_inf / (||MA||_inf ||d||_inf + ||s||_inf)`.
    pub gmres_backward_errors: Vec<f64>,
    /// `u_g + (q u_p + (q-1) u_1 + c eps) kappa_inf(M)`.
    pub gmres_error_bound: Option<f64>,
    pub spai: Option<SpaiReport>,
    /// Final iterate.
    pub solution: Vec<f64>,
}

impl IrReport {
    pub fn steps(&self) -> usize {
        self.gmres_iterations.len()
    }
}

/// Solution of `A x = b` by LU in double-double, rounded to double.
pub fn reference_solution(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(reference_solution_dd(a, b)?.into_iter().map(DoubleDouble::to_f64).collect())
}

/// Solution of `A x = b` by LU with partial pivoting in double-double.
pub fn reference_solution_dd(a: &SparseMatrix, b: &[f64]) -> Result<Vec<DoubleDouble>> {
    if !a.is_square() || b.len() != a.n_rows() {
        return Err(Error::Dimension("reference solve needs a square matrix and a conforming rhs".into()));
    }
    let lu = Lu::factor(a.to_dense::<DoubleDouble>(), 2f64.powi(-104))?;
    let bd: Vec<DoubleDouble> = b.iter().map(|&v| DoubleDouble::from_f64(v)).collect();
    let mut x = lu.solve(&bd);
    // one step of refinement in double-double tidies the last bits
    let ax = dd_matvec(a, &x);
    let r: Vec<DoubleDouble> = bd.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let dx = lu.solve(&r);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi += di;
    }
    Ok(x)
}

/// `A x` accumulated in double-double.
pub fn dd_matvec(a: &SparseMatrix, x: &[DoubleDouble]) -> Vec<DoubleDouble> {
    (0..a.n_rows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter()
                .zip(vals)
                .fold(DoubleDouble::ZERO, |s, (&j, &v)| s + DoubleDouble::from_f64(v) * x[j])
        })
        .collect()
}

/// The vector with equal components and unit 2-norm, rounded to `fmt`.
pub fn unit_rhs(n: usize, fmt: FpFormat) -> Vec<f64> {
    vec![fmt.round(1.0 / (n as f64).sqrt()); n]
}

/// `b - A x` with every operation in `fmt_r`, stored in `fmt_w`.
fn residual(a: &SparseMatrix, x: &[f64], b: &[f64], fmt_r: FpFormat, fmt_w: FpFormat) -> Vec<f64> {
    (0..a.n_rows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            let ri = if fmt_r == FpFormat::Quad {
                let mut acc = DoubleDouble::from_f64(b[i]);
                for (&j, &v) in cols.iter().zip(vals) {
                    acc -= DoubleDouble::prod_exact(v, x[j]);
                }
                acc.to_f64()
            } else {
                let mut acc = fmt_r.round(b[i]);
                for (&j, &v) in cols.iter().zip(vals) {
                    acc = fmt_r.sub(acc, fmt_r.mul(fmt_r.round(v), fmt_r.round(x[j])));
                }
                acc
            };
            fmt_w.round(ri)
        })
        .collect()
}

fn backward_error(a: &SparseMatrix, a_norm: f64, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.spmv_dd(x);
    let r = ax
        .iter()
        .zip(b)
        .map(|(&e, &bi)| (DoubleDouble::from_f64(bi) - e).to_f64().abs())
        .fold(0.0, f64::max);
    r / (a_norm * vec_norm_inf(x) + vec_norm_inf(b))
}

fn forward_error(x: &[f64], x_ref: &[f64]) -> f64 {
    let diff = x.iter().zip(x_ref).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    diff / vec_norm_inf(x_ref)
}

/// What the refinement loop needs to know about the preconditioner.
struct Applied<'a, P: ?Sized> {
    op: &'a P,
    /// The matrix actually applied, for diagnostics.
    matrix: SparseMatrix,
    occupancy: Vec<usize>,
    storage_ratio: f64,
    c_constant: f64,
    bucket_term: f64,
    q: usize,
}

/// Runs the full method: SPAI in `fmt_f`, bucketing, then refinement.
pub fn bspai_gmres_ir(a: &SparseMatrix, b: &[f64], cfg: &IrConfig) -> Result<IrReport> {
    cfg.validate()?;
    let (m, spai) = spai_right_preconditioner(a, &cfg.spai)?;
    let x_ref = reference_solution(a, b)?;
    let mut report = bspai_gmres_ir_with(a, b, &m, &x_ref, cfg)?;
    report.spai = Some(spai);
    Ok(report)
}

/// Refinement with a prebuilt preconditioner `m` (stored in `fmt_f`) and
/// reference solution.
pub fn bspai_gmres_ir_with(
    a: &SparseMatrix,
    b: &[f64],
    m: &SparseMatrix,
    x_ref: &[f64],
    cfg: &IrConfig,
) -> Result<IrReport> {
    cfg.validate()?;
    let bm: BucketedMatrix = build_buckets(m, &cfg.bucket)?;
    let u1 = cfg.bucket.precisions[0].unit_roundoff();
    let applied = Applied {
        op: &bm,
        matrix: bm.to_sparse(),
        occupancy: bm.occupancy(),
        storage_ratio: bm.storage_ratio(),
        c_constant: bm.c_constant_with(CFormula::Printed),
        bucket_term: (bm.q() as f64 - 1.0) * u1 + bm.c_constant() * cfg.bucket.eps_target,
        q: bm.q(),
    };
    let x0 = bspmv(&bm, b)?;
    refine(a, b, x0, x_ref, &applied, cfg)
}

/// Uniform-precision SPAI-GMRES-IR with a prebuilt preconditioner: `M` is
/// applied as a plain sparse product in `fmt_f` for the initial guess and in
/// `fmt_w` inside GMRES.
pub fn spai_gmres_ir_with(
    a: &SparseMatrix,
    b: &[f64],
    m: &SparseMatrix,
    x_ref: &[f64],
    cfg: &IrConfig,
) -> Result<IrReport> {
    cfg.validate()?;
    let stored = m.map_values(|v| cfg.fmt_w.round(v));
    let op = UniformPreconditioner { matrix: m, fmt: cfg.fmt_w };
    let c = crate::bucketed::c_from_row_occupancy(
        (0..m.n_rows()).map(|i| vec![m.row_nnz(i)]),
        &[cfg.fmt_w.unit_roundoff()],
        CFormula::Printed,
    );
    let applied = Applied {
        op: &op,
        matrix: stored,
        occupancy: vec![m.nnz()],
        storage_ratio: 1.0,
        c_constant: c,
        bucket_term: c * cfg.fmt_w.unit_roundoff(),
        q: 1,
    };
    let x0 = crate::sparsemat::spmv_uniform(m, b, cfg.fmt_f)?;
    refine(a, b, x0, x_ref, &applied, cfg)
}

fn refine<P: Preconditioner + ?Sized>(
    a: &SparseMatrix,
    b: &[f64],
    x0: Vec<f64>,
    x_ref: &[f64],
    pre: &Applied<'_, P>,
    cfg: &IrConfig,
) -> Result<IrReport> {
    let n = a.n_rows();
    if !a.is_square() || b.len() != n || x_ref.len() != n || pre.op.shape() != (n, n) {
        return Err(Error::Dimension("refinement operands do not conform".into()));
    }
    if vec_norm_inf(b) == 0.0 {
        return Err(Error::Config("the right-hand side is zero".into()));
    }
    let threshold = cfg.threshold(n);
    let a_norm = a.norm_inf();
    let gcfg = GmresConfig { tol: cfg.tol, max_iters: n.max(1), fmt_work: cfg.fmt_g, fmt_matvec: cfg.fmt_p };

    let (mut kappa_ma, mut kappa_m, mut bound, mut ma) = (None, None, None, None);
    if cfg.diagnostics {
        let prod = pre.matrix.matmul(a)?;
        kappa_ma = kappa_inf(&prod).ok();
        kappa_m = kappa_inf(&pre.matrix).ok();
        let (ug, up) = (cfg.fmt_g.unit_roundoff(), cfg.fmt_p.unit_roundoff());
        bound = kappa_m.map(|k| ug + (pre.q as f64 * up + pre.bucket_term) * k);
        ma = Some(prod);
    }

    let mut x: Vec<f64> = x0.into_iter().map(|v| cfg.fmt_w.round(v)).collect();
    let mut report = IrReport {
        n,
        converged: false,
        gmres_iterations: vec![],
        gmres_converged: vec![],
        forward_errors: vec![],
        backward_errors: vec![],
        threshold,
        total_gmres_iterations: 0,
        preconditioner_nnz: pre.occupancy.iter().sum(),
        occupancy: pre.occupancy.clone(),
        storage_ratio: pre.storage_ratio,
        c_constant: pre.c_constant,
        kappa_ma,
        kappa_m,
        gmres_backward_errors: vec![],
        gmres_error_bound: bound,
        spai: None,
        solution: vec![],
    };

    let mut growth = 0;
    for step in 0..=cfg.i_max {
        let fe = forward_error(&x, x_ref);
        let be = backward_error(a, a_norm, &x, b);
        if let Some(&prev) = report.forward_errors.last() {
            growth = if fe > prev { growth + 1 } else { 0 };
        }
        report.forward_errors.push(fe);
        report.backward_errors.push(be);
        if fe <= threshold && be <= threshold {
            report.converged = true;
            break;
        }
        if step == cfg.i_max || growth >= cfg.divergence_steps || !fe.is_finite() {
            break;
        }

        let r = residual(a, &x, b, cfg.fmt_r, cfg.fmt_w);
        let sol = gmres_left(a, pre.op, &r, &gcfg)?;
        if let Some(ma) = &ma {
            let s: Vec<f64> = pre.op.apply(&r)?.into_iter().map(|v| cfg.fmt_g.round(v)).collect();
            report.gmres_backward_errors.push(preconditioned_backward_error(ma, &sol.d, &s));
        }
        report.gmres_iterations.push(sol.iterations);
        report.gmres_converged.push(sol.converged);
        for (xi, di) in x.iter_mut().zip(&sol.d) {
            *xi = cfg.fmt_w.add(*xi, *di);
        }
    }
    report.total_gmres_iterations = report.gmres_iterations.iter().sum();
    report.solution = x;
    Ok(report)
}

fn preconditioned_backward_error(ma: &SparseMatrix, d: &[f64], s: &[f64]) -> f64 {
    let prod = ma.spmv_dd(d);
    let num = prod
        .iter()
        .zip(s)
        .map(|(&p, &si)| (DoubleDouble::from_f64(si) - p).to_f64().abs())
        .fold(0.0, f64::max);
    num / (ma.norm_inf() * vec_norm_inf(d) + vec_norm_inf(s))
}
