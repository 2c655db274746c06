//! Experiment runner: reads a spec, runs the uniform baseline and every
//! bucketed variant per matrix, and collects table rows.

mod spec;
mod table;
pub mod verify;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::refine::{bspai_gmres_ir_with, reference_solution, spai_gmres_ir_with, unit_rhs, IrConfig, IrReport};
use crate::spai::spai_right_preconditioner;
use crate::sparsemat::{cond2_transpose, kappa_inf, read_matrix_market_file, SparseMatrix};

pub use spec::{format_eps, parse_eps, ExperimentSpec, MatrixEntry, CORPUS_ENV};
pub use table::{emit_table, parse_rows_json, TableFormat};

/// One line of a results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub matrix: String,
    /// `SPAI` for the baseline, `BSPAI(2^-53)` and so on for bucketed runs.
    pub preconditioner: String,
    pub eps_b: Option<f64>,
    pub kappa_ma: Option<f64>,
    pub nnz: usize,
    pub occupancy: Vec<usize>,
    pub storage_percent: f64,
    pub total_iterations: usize,
    pub iterations_per_step: Vec<usize>,
    pub converged: bool,
    pub forward_error: Option<f64>,
    pub backward_error: Option<f64>,
    /// Set when the run failed; the numeric fields are then empty.
    pub error: Option<String>,
}

impl ResultRow {
    fn from_report(matrix: &str, label: String, eps_b: Option<f64>, rep: &IrReport) -> Self {
        ResultRow {
            matrix: matrix.to_string(),
            preconditioner: label,
            eps_b,
            kappa_ma: rep.kappa_ma,
            nnz: rep.preconditioner_nnz,
            occupancy: rep.occupancy.clone(),
            storage_percent: 100.0 * rep.storage_ratio,
            total_iterations: rep.total_gmres_iterations,
            iterations_per_step: rep.gmres_iterations.clone(),
            converged: rep.converged,
            forward_error: rep.forward_errors.last().copied(),
            backward_error: rep.backward_errors.last().copied(),
            error: None,
        }
    }

    fn failed(matrix: &str, label: String, eps_b: Option<f64>, err: String) -> Self {
        ResultRow {
            matrix: matrix.to_string(),
            preconditioner: label,
            eps_b,
            kappa_ma: None,
            nnz: 0,
            occupancy: vec![],
            storage_percent: 0.0,
            total_iterations: 0,
            iterations_per_step: vec![],
            converged: false,
            forward_error: None,
            backward_error: None,
            error: Some(err),
        }
    }
}

/// Everything computed for one matrix of a spec.
#[derive(Clone, Debug)]
pub struct MatrixRun {
    pub name: String,
    pub baseline: std::result::Result<IrReport, String>,
    pub bucketed: Vec<(f64, std::result::Result<IrReport, String>)>,
}

impl MatrixRun {
    pub fn rows(&self) -> Vec<ResultRow> {
        let mut rows = Vec::with_capacity(1 + self.bucketed.len());
        let label = "SPAI".to_string();
        rows.push(match &self.baseline {
            Ok(rep) => ResultRow::from_report(&self.name, label, None, rep),
            Err(e) => ResultRow::failed(&self.name, label, None, e.clone()),
        });
        for (eps, res) in &self.bucketed {
            let label = format!("BSPAI({})", format_eps(*eps));
            rows.push(match res {
                Ok(rep) => ResultRow::from_report(&self.name, label, Some(*eps), rep),
                Err(e) => ResultRow::failed(&self.name, label, Some(*eps), e.clone()),
            });
        }
        rows
    }
}

/// Baseline plus every bucketed variant for one matrix already in memory.
pub fn run_matrix(spec: &ExperimentSpec, entry: &MatrixEntry, a: &SparseMatrix) -> MatrixRun {
    let fail = |e: crate::Error| e.to_string();
    let base_cfg = spec.ir_config(entry.spai_eps, spec.precision.working().unit_roundoff());
    let n = a.n_rows();
    let b = unit_rhs(n, base_cfg.fmt_w);
    let setup = spai_right_preconditioner(a, &base_cfg.spai)
        .and_then(|(m, _)| reference_solution(a, &b).map(|x| (m, x)));
    let (m, x_ref) = match setup {
        Ok(v) => v,
        Err(e) => {
            let msg = fail(e);
            return MatrixRun {
                name: entry.name.clone(),
                baseline: Err(msg.clone()),
                bucketed: spec.eps_b.iter().map(|&e| (e, Err(msg.clone()))).collect(),
            };
        }
    };
    let baseline = spai_gmres_ir_with(a, &b, &m, &x_ref, &base_cfg.uniform()).map_err(fail);
    let bucketed = spec
        .eps_b
        .iter()
        .map(|&eps| {
            let cfg: IrConfig = spec.ir_config(entry.spai_eps, eps);
            (eps, bspai_gmres_ir_with(a, &b, &m, &x_ref, &cfg).map_err(fail))
        })
        .collect();
    MatrixRun { name: entry.name.clone(), baseline, bucketed }
}

/// Runs every matrix of the spec. Matrices run in parallel; the output
/// keeps spec order. A matrix that cannot be read or solved yields rows
/// carrying the error.
pub fn run_experiment_detailed(spec: &ExperimentSpec) -> Vec<MatrixRun> {
    spec.matrices
        .par_iter()
        .map(|entry| match read_matrix_market_file(&entry.path) {
            Ok(a) => run_matrix(spec, entry, &a),
            Err(e) => {
                let msg = format!("{}: {e}", entry.path.display());
                MatrixRun {
                    name: entry.name.clone(),
                    baseline: Err(msg.clone()),
                    bucketed: spec.eps_b.iter().map(|&e| (e, Err(msg.clone()))).collect(),
                }
            }
        })
        .collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Vec<ResultRow> {
    run_experiment_detailed(spec).iter().flat_map(MatrixRun::rows).collect()
}

/// Size and conditioning summary of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixInfo {
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub max_row_nnz: usize,
    pub norm_inf: f64,
    pub norm_max: f64,
    pub kappa_inf: Option<f64>,
    pub cond2_transpose: Option<f64>,
}

pub fn matrix_info(a: &SparseMatrix) -> MatrixInfo {
    MatrixInfo {
        n_rows: a.n_rows(),
        n_cols: a.n_cols(),
        nnz: a.nnz(),
        max_row_nnz: a.max_row_nnz(),
        norm_inf: a.norm_inf(),
        norm_max: a.norm_max(),
        kappa_inf: kappa_inf(a).ok(),
        cond2_transpose: cond2_transpose(a).ok(),
    }
}

pub fn matrix_info_file(path: impl AsRef<Path>) -> Result<MatrixInfo> {
    Ok(matrix_info(&read_matrix_market_file(path)?))
}
