//! Sparse approximate inverse by Frobenius-norm minimization.
//!
//! Column `k` of `M` minimizes `||e_k - A m_k||_2` over a sparsity pattern
//! `J_k` that starts from an initial guess and grows adaptively: after each
//! least-squares solve, every column index `j` reachable from the current
//! residual is scored by the residual norm `rho_jk` that a one-dimensional
//! update along `A e_j` would achieve, and up to `beta` of the best scoring
//! indices (those not worse than the mean score) are added. Growth stops
//! when the residual drops below `eps_tol` or after `alpha` growth steps.
//!
//! The QR factorization of each reduced problem is recomputed from scratch
//! at every growth step instead of being updated. That costs an extra
//! `O(|I_k| |J_k|^2)` per step, which is negligible at the sizes targeted
//! here.

mod lsq;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::FpFormat;
use crate::sparsemat::{column_scale_transpose, SparseMatrix};
use lsq::{householder_solve, min_norm_solve, Block};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPattern {
    Identity,
    PatternOfA,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaiConfig {
    /// Per-column residual threshold.
    pub eps_tol: f64,
    /// Maximum number of pattern-growth steps per column.
    pub alpha: usize,
    /// Maximum number of indices added per growth step.
    pub beta: usize,
    pub initial_pattern: InitialPattern,
    /// Precision of the least-squares solves.
    pub build_fmt: FpFormat,
}

impl Default for SpaiConfig {
    fn default() -> Self {
        SpaiConfig {
            eps_tol: 0.1,
            alpha: 5,
            beta: 8,
            initial_pattern: InitialPattern::Identity,
            build_fmt: FpFormat::Double,
        }
    }
}

impl SpaiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tol > 0.0) {
            return Err(Error::Config(format!("SPAI tolerance must be positive, got {}", self.eps_tol)));
        }
        if self.beta < 1 {
            return Err(Error::Config("SPAI beta must be at least 1".into()));
        }
        if matches!(self.build_fmt, FpFormat::Drop) {
            return Err(Error::Config("SPAI cannot be built in the drop format".into()));
        }
        Ok(())
    }
}

/// Why the growth loop of a column ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnExit {
    /// Residual at or below the tolerance.
    Converged,
    /// `alpha` growth steps used up.
    IterationCap,
    /// No acceptable index left to add.
    NoCandidates,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaiReport {
    /// `||e_k - A m_k||_2` of the stored column, evaluated in double.
    pub residual_norms: Vec<f64>,
    pub pattern_sizes: Vec<usize>,
    pub exits: Vec<ColumnExit>,
    /// Columns that stopped without reaching the tolerance.
    pub unconverged_columns: usize,
}

struct ColumnResult {
    pattern: Vec<usize>,
    values: Vec<f64>,
    residual: f64,
    exit: ColumnExit,
}

struct Problem<'a> {
    a: &'a SparseMatrix,
    /// Columns of `a` as rows.
    at: &'a SparseMatrix,
    cfg: &'a SpaiConfig,
}

impl Problem<'_> {
    /// Shadow of the pattern, plus row `k` so that the reduced residual is
    /// the full residual `e_k - A m_k`.
    fn shadow(&self, pattern: &[usize], k: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = pattern.iter().flat_map(|&j| self.at.row(j).0.iter().copied()).collect();
        rows.push(k);
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    fn reduced_block(&self, rows: &[usize], pattern: &[usize]) -> Block {
        let fmt = self.cfg.build_fmt;
        let mut blk = Block::zeros(rows.len(), pattern.len());
        for (c, &j) in pattern.iter().enumerate() {
            let (ri, vals) = self.at.row(j);
            for (&i, &v) in ri.iter().zip(vals) {
                let r = rows.binary_search(&i).expect("shadow contains every touched row");
                blk.set(r, c, fmt.round(v));
            }
        }
        blk
    }

    /// Residual `A_bar m_bar - e_bar` in the build precision.
    fn reduced_residual(&self, blk: &Block, m: &[f64], e: &[f64]) -> Vec<f64> {
        let fmt = self.cfg.build_fmt;
        (0..blk.rows)
            .map(|i| {
                let mut s = 0.0;
                for (c, &mc) in m.iter().enumerate() {
                    s = fmt.add(s, fmt.mul(blk.at(i, c), mc));
                }
                fmt.sub(s, e[i])
            })
            .collect()
    }

    /// `||e_k - A m_k||_2` in double for a column with the given entries.
    fn true_residual(&self, k: usize, pattern: &[usize], values: &[f64]) -> f64 {
        let mut r = std::collections::BTreeMap::new();
        r.insert(k, -1.0f64);
        for (&j, &mj) in pattern.iter().zip(values) {
            let (ri, vals) = self.at.row(j);
            for (&i, &v) in ri.iter().zip(vals) {
                *r.entry(i).or_insert(0.0) += v * mj;
            }
        }
        r.values().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn column(&self, k: usize) -> ColumnResult {
        let cfg = self.cfg;
        let fmt = cfg.build_fmt;
        let mut pattern: Vec<usize> = match cfg.initial_pattern {
            InitialPattern::Identity => vec![k],
            InitialPattern::PatternOfA => self.at.row(k).0.to_vec(),
        };
        if pattern.is_empty() {
            pattern.push(k);
        }

        let mut step = 0;
        loop {
            let rows = self.shadow(&pattern, k);
            let blk = self.reduced_block(&rows, &pattern);
            let e: Vec<f64> = rows.iter().map(|&i| if i == k { 1.0 } else { 0.0 }).collect();
            let m = householder_solve(&blk, &e, fmt)
                .unwrap_or_else(|| min_norm_solve(&blk, &e).into_iter().map(|v| fmt.round(v)).collect());
            let s = self.reduced_residual(&blk, &m, &e);
            let s_norm = fmt.sqrt(s.iter().fold(0.0, |acc, &x| fmt.add(acc, fmt.mul(x, x))));

            let exit = if s_norm <= cfg.eps_tol && self.true_residual(k, &pattern, &m) <= cfg.eps_tol {
                Some(ColumnExit::Converged)
            } else if step == cfg.alpha {
                Some(ColumnExit::IterationCap)
            } else if !self.grow(&mut pattern, &rows, &s) {
                Some(ColumnExit::NoCandidates)
            } else {
                None
            };
            if let Some(exit) = exit {
                let residual = self.true_residual(k, &pattern, &m);
                return ColumnResult { pattern, values: m, residual, exit };
            }
            step += 1;
        }
    }

    /// Adds up to `beta` acceptable indices to `pattern`. Returns whether
    /// anything was added.
    fn grow(&self, pattern: &mut Vec<usize>, rows: &[usize], s: &[f64]) -> bool {
        let s_sq: f64 = s.iter().map(|x| x * x).sum();
        let mut candidates: Vec<usize> = rows
            .iter()
            .flat_map(|&l| self.a.row(l).0.iter().copied())
            .filter(|j| pattern.binary_search(j).is_err())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            return false;
        }

        // rho_jk^2 = ||s||^2 - (s^T a_j)^2 / ||a_j||^2, with a_j = A(I_k, j)
        let mut scored: Vec<(f64, usize)> = candidates
            .iter()
            .map(|&j| {
                let (ri, vals) = self.at.row(j);
                let (mut proj, mut norm_sq) = (0.0, 0.0);
                for (&i, &v) in ri.iter().zip(vals) {
                    if let Ok(p) = rows.binary_search(&i) {
                        proj += s[p] * v;
                        norm_sq += v * v;
                    }
                }
                let rho_sq = if norm_sq > 0.0 { s_sq - proj * proj / norm_sq } else { s_sq };
                (rho_sq.max(0.0).sqrt(), j)
            })
            .collect();
        let mean = scored.iter().map(|c| c.0).sum::<f64>() / scored.len() as f64;
        // smallest rho first, ties broken by the smaller index
        scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        let mut added = false;
        for &(rho, j) in scored.iter().take(self.cfg.beta) {
            if rho > mean {
                break;
            }
            let pos = pattern.binary_search(&j).unwrap_err();
            pattern.insert(pos, j);
            added = true;
        }
        added
    }
}

/// Builds `M ~ A^{-1}` column by column (a right approximate inverse).
pub fn spai_build(a: &SparseMatrix, cfg: &SpaiConfig) -> Result<(SparseMatrix, SpaiReport)> {
    cfg.validate()?;
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "SPAI needs a square matrix, got {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    if cfg.initial_pattern == InitialPattern::Identity {
        if let Some(index) = a.first_zero_diagonal() {
            return Err(Error::ZeroDiagonal { index });
        }
    }
    let n = a.n_rows();
    let at = a.transpose();
    let problem = Problem { a, at: &at, cfg };
    let columns: Vec<ColumnResult> = (0..n).into_par_iter().map(|k| problem.column(k)).collect();

    let mut triplets = Vec::new();
    for (k, col) in columns.iter().enumerate() {
        for (&j, &v) in col.pattern.iter().zip(&col.values) {
            triplets.push((j, k, v));
        }
    }
    let m = SparseMatrix::from_triplets(n, n, &triplets)?;
    let report = SpaiReport {
        residual_norms: columns.iter().map(|c| c.residual).collect(),
        pattern_sizes: columns.iter().map(|c| c.pattern.len()).collect(),
        exits: columns.iter().map(|c| c.exit).collect(),
        unconverged_columns: columns.iter().filter(|c| c.exit != ColumnExit::Converged).count(),
    };
    Ok((m, report))
}

/// Left preconditioner for `A`: runs [`spai_build`] on the column-scaled
/// transpose `B = A^T D` and returns `M = M_B^T D`, with entries stored in
/// the build precision. The report refers to the columns of `M_B`.
pub fn spai_right_preconditioner(a: &SparseMatrix, cfg: &SpaiConfig) -> Result<(SparseMatrix, SpaiReport)> {
    let (b, d) = column_scale_transpose(a)?;
    let (mb, report) = spai_build(&b, cfg)?;
    let fmt = cfg.build_fmt;
    let m = d.apply_right(&mb.transpose()).map_values(|v| fmt.round(v));
    Ok((m, report))
}
