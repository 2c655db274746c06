//! Published reference values for the SuiteSparse test matrices and lookup
//! of a local copy of the corpus.
//!
//! The matrices are not bundled. `scripts/fetch_suitesparse.sh` downloads
//! them into `data/suitesparse/`; `BSPAI_CORPUS` points elsewhere.

use std::path::PathBuf;

use bspai::harness::CORPUS_ENV;

/// A matrix of the test set with its published statistics.
#[derive(Clone, Copy, Debug)]
pub struct Reference {
    pub name: &'static str,
    /// SuiteSparse group.
    pub group: &'static str,
    pub n: usize,
    pub nnz: usize,
    /// `kappa_inf(A)`, when listed.
    pub kappa_inf: Option<f64>,
}

pub const MATRICES: [Reference; 9] = [
    Reference { name: "steam1", group: "HB", n: 240, nnz: 2248, kappa_inf: Some(3.1e7) },
    Reference { name: "pores_3", group: "HB", n: 532, nnz: 3474, kappa_inf: Some(1.2e6) },
    Reference { name: "steam3", group: "HB", n: 80, nnz: 314, kappa_inf: Some(7.6e10) },
    Reference { name: "saylr1", group: "HB", n: 238, nnz: 1128, kappa_inf: None },
    Reference { name: "cage5", group: "vanHeukelum", n: 37, nnz: 233, kappa_inf: Some(2.9e1) },
    Reference { name: "gre_115", group: "HB", n: 115, nnz: 421, kappa_inf: Some(1.4e2) },
    Reference { name: "sherman4", group: "HB", n: 1104, nnz: 3786, kappa_inf: Some(3.1e3) },
    Reference { name: "hor_131", group: "HB", n: 434, nnz: 4182, kappa_inf: Some(1.5e5) },
    Reference { name: "bfwa782", group: "Bai", n: 782, nnz: 7514, kappa_inf: Some(6.8e3) },
];

pub fn reference(name: &str) -> Option<&'static Reference> {
    MATRICES.iter().find(|r| r.name == name)
}

/// One published solver run: SPAI tolerance and GMRES iterations per
/// refinement step.
#[derive(Clone, Copy, Debug)]
pub struct PublishedRun {
    pub matrix: &'static str,
    pub spai_eps: f64,
    pub iterations: &'static [usize],
}

impl PublishedRun {
    pub fn total(&self) -> usize {
        self.iterations.iter().sum()
    }

    pub fn steps(&self) -> usize {
        self.iterations.len()
    }
}

/// Double/double/quad with `eps_b = 2^-53`.
pub const DDQ_RUNS: [PublishedRun; 9] = [
    PublishedRun { matrix: "steam1", spai_eps: 0.1, iterations: &[7, 7, 7] },
    PublishedRun { matrix: "pores_3", spai_eps: 0.5, iterations: &[111, 103, 109] },
    PublishedRun { matrix: "steam3", spai_eps: 0.1, iterations: &[5, 5, 5] },
    PublishedRun { matrix: "saylr1", spai_eps: 0.4, iterations: &[64, 66, 67] },
    PublishedRun { matrix: "cage5", spai_eps: 0.1, iterations: &[7, 7] },
    PublishedRun { matrix: "gre_115", spai_eps: 0.1, iterations: &[9, 9] },
    PublishedRun { matrix: "sherman4", spai_eps: 0.5, iterations: &[92, 95] },
    PublishedRun { matrix: "hor_131", spai_eps: 0.5, iterations: &[108, 111, 109, 108] },
    PublishedRun { matrix: "bfwa782", spai_eps: 0.5, iterations: &[113, 121] },
];

/// Single/single/double with `eps_b = 2^-24`, the matrices checked for
/// convergence.
pub const SSD_RUNS: [PublishedRun; 4] = [
    PublishedRun { matrix: "cage5", spai_eps: 0.1, iterations: &[4, 4] },
    PublishedRun { matrix: "gre_115", spai_eps: 0.4, iterations: &[16, 16] },
    PublishedRun { matrix: "sherman4", spai_eps: 0.3, iterations: &[35, 38] },
    PublishedRun { matrix: "bfwa782", spai_eps: 0.4, iterations: &[57, 70] },
];

/// Single/single/double runs published for the remaining matrices.
pub const SSD_OTHER_RUNS: [PublishedRun; 4] = [
    PublishedRun { matrix: "steam1", spai_eps: 0.1, iterations: &[4, 240] },
    PublishedRun { matrix: "pores_3", spai_eps: 0.5, iterations: &[93, 93, 90, 77] },
    PublishedRun { matrix: "steam3", spai_eps: 0.1, iterations: &[3, 80] },
    PublishedRun { matrix: "saylr1", spai_eps: 0.4, iterations: &[238] },
];

/// Corpus directory: `BSPAI_CORPUS`, else `data/suitesparse` in the
/// workspace.
pub fn corpus_dir() -> PathBuf {
    match std::env::var_os(CORPUS_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/suitesparse"),
    }
}

pub fn matrix_path(name: &str) -> PathBuf {
    corpus_dir().join(format!("{name}.mtx"))
}

/// Names of test matrices without a local file.
pub fn missing_matrices<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    names.into_iter().filter(|n| !matrix_path(n).is_file()).collect()
}

/// Download location of a matrix in Matrix Market form.
pub fn download_url(r: &Reference) -> String {
    format!("https://suitesparse-collection-website.herokuapp.com/MM/{}/{}.tar.gz", r.group, r.name)
}
