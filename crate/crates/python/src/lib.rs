//! Python bindings: precision simulation, sparse matrices, SPAI, bucketed
//! storage and the refinement solver.
//!
//! Formats are passed as strings (`"half"`, `"single"`, `"double"`,
//! `"quad"`, `"drop"`). Reports come back as plain dicts.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use bspai::bucketed::{self, BucketNorm, BucketScheme, CFormula};
use bspai::harness::{self, ExperimentSpec};
use bspai::krylov::{gmres_left, GmresConfig};
use bspai::refine::{self, IrConfig, PrecisionTuple};
use bspai::spai::{self, InitialPattern, SpaiConfig};
use bspai::sparsemat::{self, kappa_inf};
use bspai::{FpFormat, OpKind};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fmt(name: &str) -> PyResult<FpFormat> {
    name.parse().map_err(err)
}

/// Serializes through JSON so reports reach Python as dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyfunction]
fn round_to(x: f64, format: &str) -> PyResult<f64> {
    Ok(fmt(format)?.round(x))
}

#[pyfunction]
fn op_in(a: f64, b: f64, op: &str, format: &str) -> PyResult<f64> {
    let kind = match op {
        "add" | "+" => OpKind::Add,
        "sub" | "-" => OpKind::Sub,
        "mul" | "*" => OpKind::Mul,
        "div" | "/" => OpKind::Div,
        other => return Err(err(format!("unknown operation `{other}`"))),
    };
    Ok(bspai::op_in(a, b, kind, fmt(format)?))
}

#[pyfunction]
fn unit_roundoff(format: &str) -> PyResult<f64> {
    Ok(fmt(format)?.unit_roundoff())
}

#[pyclass(name = "SparseMatrix", module = "bspai_py", skip_from_py_object)]
#[derive(Clone)]
struct PySparseMatrix {
    inner: sparsemat::SparseMatrix,
}

#[pymethods]
impl PySparseMatrix {
    #[staticmethod]
    fn from_triplets(n_rows: usize, n_cols: usize, rows: Vec<usize>, cols: Vec<usize>, values: Vec<f64>) -> PyResult<Self> {
        if rows.len() != cols.len() || rows.len() != values.len() {
            return Err(err("rows, cols and values must have the same length"));
        }
        let trip: Vec<_> = rows.into_iter().zip(cols).zip(values).map(|((i, j), v)| (i, j, v)).collect();
        Ok(PySparseMatrix { inner: sparsemat::SparseMatrix::from_triplets(n_rows, n_cols, &trip).map_err(err)? })
    }

    #[staticmethod]
    fn from_dense(rows: Vec<Vec<f64>>) -> Self {
        PySparseMatrix { inner: sparsemat::SparseMatrix::from_dense_rows(&rows) }
    }

    #[staticmethod]
    fn read_mtx(path: &str) -> PyResult<Self> {
        Ok(PySparseMatrix { inner: sparsemat::read_matrix_market_file(path).map_err(err)? })
    }

    fn write_mtx(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(err)?;
        sparsemat::write_matrix_market(&self.inner, BufWriter::new(f)).map_err(err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_rows(), self.inner.n_cols())
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn to_triplets(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let mut out = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..self.inner.n_rows() {
            let (cols, vals) = self.inner.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out.0.push(i);
                out.1.push(j);
                out.2.push(v);
            }
        }
        out
    }

    /// `A x` with every operation rounded to `format`.
    #[pyo3(signature = (x, format = "double"))]
    fn spmv(&self, x: Vec<f64>, format: &str) -> PyResult<Vec<f64>> {
        sparsemat::spmv_uniform(&self.inner, &x, fmt(format)?).map_err(err)
    }

    fn norm_inf(&self) -> f64 {
        self.inner.norm_inf()
    }

    fn kappa_inf(&self) -> PyResult<f64> {
        kappa_inf(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("SparseMatrix({}x{}, nnz={})", self.inner.n_rows(), self.inner.n_cols(), self.inner.nnz())
    }
}

#[pyclass(name = "BucketedMatrix", module = "bspai_py")]
struct PyBucketedMatrix {
    inner: bucketed::BucketedMatrix,
}

fn parse_norm(norm: &str) -> PyResult<BucketNorm> {
    match norm {
        "max-abs" | "max" => Ok(BucketNorm::MaxAbs),
        "inf" | "inf-norm" => Ok(BucketNorm::Inf),
        other => Err(err(format!("unknown norm `{other}`"))),
    }
}

#[pymethods]
impl PyBucketedMatrix {
    #[new]
    #[pyo3(signature = (matrix, precisions, eps_b, norm = "max-abs"))]
    fn new(matrix: &PySparseMatrix, precisions: Vec<String>, eps_b: f64, norm: &str) -> PyResult<Self> {
        let precisions = precisions.iter().map(|p| fmt(p)).collect::<PyResult<Vec<_>>>()?;
        let scheme = BucketScheme::new(precisions, eps_b, parse_norm(norm)?).map_err(err)?;
        Ok(PyBucketedMatrix { inner: bucketed::build_buckets(&matrix.inner, &scheme).map_err(err)? })
    }

    #[staticmethod]
    fn load(json_path: &str, blob_path: &str) -> PyResult<Self> {
        let json = BufReader::new(File::open(json_path).map_err(err)?);
        let blob = BufReader::new(File::open(blob_path).map_err(err)?);
        Ok(PyBucketedMatrix { inner: bucketed::BucketedMatrix::load(json, blob).map_err(err)? })
    }

    fn save(&self, json_path: &str, blob_path: &str) -> PyResult<()> {
        let json = BufWriter::new(File::create(json_path).map_err(err)?);
        let blob = BufWriter::new(File::create(blob_path).map_err(err)?);
        self.inner.save(json, blob).map_err(err)
    }

    #[getter]
    fn occupancy(&self) -> Vec<usize> {
        self.inner.occupancy()
    }

    #[pyo3(signature = (unsquared = false))]
    fn c_constant(&self, unsquared: bool) -> f64 {
        self.inner.c_constant_with(if unsquared { CFormula::Unsquared } else { CFormula::Printed })
    }

    fn storage_ratio(&self) -> f64 {
        self.inner.storage_ratio()
    }

    /// `(q - 1) u_1 + c eps` with the printed constant.
    fn error_bound(&self) -> f64 {
        self.inner.error_bound(CFormula::Printed)
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        bucketed::bspmv(&self.inner, &x).map_err(err)
    }

    fn to_sparse(&self) -> PySparseMatrix {
        PySparseMatrix { inner: self.inner.to_sparse() }
    }
}

#[pyfunction]
fn normwise_backward_error(a: &PySparseMatrix, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    bucketed::normwise_backward_error(&a.inner, &x, &y).map_err(err)
}

/// Right SPAI preconditioner of `a`; returns `(M, report)`.
#[pyfunction]
#[pyo3(signature = (a, eps, alpha = None, beta = 8, build_format = "double", pattern_of_a = false))]
fn spai_preconditioner<'py>(
    py: Python<'py>,
    a: &PySparseMatrix,
    eps: f64,
    alpha: Option<usize>,
    beta: usize,
    build_format: &str,
    pattern_of_a: bool,
) -> PyResult<(PySparseMatrix, Bound<'py, PyAny>)> {
    let cfg = SpaiConfig {
        eps_tol: eps,
        alpha: alpha.unwrap_or(usize::MAX),
        beta,
        initial_pattern: if pattern_of_a { InitialPattern::PatternOfA } else { InitialPattern::Identity },
        build_fmt: fmt(build_format)?,
    };
    let (m, report) = spai::spai_right_preconditioner(&a.inner, &cfg).map_err(err)?;
    Ok((PySparseMatrix { inner: m }, to_py(py, &report)?))
}

/// Left-preconditioned GMRES; returns `(d, iterations, converged)`.
#[pyfunction]
#[pyo3(signature = (a, m, r, tol, format = "double"))]
fn gmres(a: &PySparseMatrix, m: &PyBucketedMatrix, r: Vec<f64>, tol: f64, format: &str) -> PyResult<(Vec<f64>, usize, bool)> {
    let cfg = GmresConfig::new(tol, a.inner.n_rows(), fmt(format)?);
    let res = gmres_left(&a.inner, &m.inner, &r, &cfg).map_err(err)?;
    Ok((res.d, res.iterations, res.converged))
}

#[pyfunction]
fn reference_solution(a: &PySparseMatrix, b: Vec<f64>) -> PyResult<Vec<f64>> {
    refine::reference_solution(&a.inner, &b).map_err(err)
}

/// Full solve of `A x = b`; `b` defaults to the unit-norm constant vector.
#[pyfunction]
#[pyo3(signature = (a, precisions = "ddq", spai_eps = 0.1, eps_b = None, b = None, diagnostics = false))]
fn solve<'py>(
    py: Python<'py>,
    a: &PySparseMatrix,
    precisions: &str,
    spai_eps: f64,
    eps_b: Option<f64>,
    b: Option<Vec<f64>>,
    diagnostics: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let tuple: PrecisionTuple = precisions.parse().map_err(err)?;
    let eps_b = eps_b.unwrap_or_else(|| tuple.working().unit_roundoff());
    let mut cfg = IrConfig::for_tuple(tuple, spai_eps, eps_b);
    cfg.diagnostics = diagnostics;
    let b = b.unwrap_or_else(|| refine::unit_rhs(a.inner.n_rows(), cfg.fmt_w));
    let report = py.detach(|| refine::bspai_gmres_ir(&a.inner, &b, &cfg)).map_err(err)?;
    to_py(py, &report)
}

/// Runs an experiment spec file and returns its rows.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, spec_path: &str) -> PyResult<Bound<'py, PyAny>> {
    let spec = ExperimentSpec::from_file(spec_path).map_err(err)?;
    let rows = py.detach(|| harness::run_experiment(&spec));
    to_py(py, &rows)
}

#[pymodule]
fn bspai_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySparseMatrix>()?;
    m.add_class::<PyBucketedMatrix>()?;
    m.add_function(wrap_pyfunction!(round_to, m)?)?;
    m.add_function(wrap_pyfunction!(op_in, m)?)?;
    m.add_function(wrap_pyfunction!(unit_roundoff, m)?)?;
    m.add_function(wrap_pyfunction!(normwise_backward_error, m)?)?;
    m.add_function(wrap_pyfunction!(spai_preconditioner, m)?)?;
    m.add_function(wrap_pyfunction!(gmres, m)?)?;
    m.add_function(wrap_pyfunction!(reference_solution, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
