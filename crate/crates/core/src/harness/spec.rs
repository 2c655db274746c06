//! Experiment specification files.
//!
//! ```toml
//! precision = "ddq"
//! eps_b = ["2^-53", "2^-37"]
//! corpus = "../data/suitesparse"
//!
//! [[matrix]]
//! name = "steam1"
//! spai_eps = 0.1
//! ```
//!
//! A matrix without `path` is read from `<corpus>/<name>.mtx`. The corpus
//! directory is relative to the spec file and can be overridden with the
//! `BSPAI_CORPUS` environment variable.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bucketed::{BucketNorm, BucketScheme};
use crate::error::{Error, Result};
use crate::precision::FpFormat;
use crate::refine::{IrConfig, PrecisionTuple};
use crate::spai::InitialPattern;

pub const CORPUS_ENV: &str = "BSPAI_CORPUS";

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixEntry {
    pub name: String,
    pub path: PathBuf,
    pub spai_eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub precision: PrecisionTuple,
    pub eps_b: Vec<f64>,
    pub ladder: Vec<FpFormat>,
    pub tau: f64,
    pub norm: BucketNorm,
    pub i_max: usize,
    /// `None` removes the cap on SPAI growth steps.
    pub alpha: Option<usize>,
    pub beta: usize,
    pub initial_pattern: InitialPattern,
    pub diagnostics: bool,
    pub matrices: Vec<MatrixEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EpsValue {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    precision: String,
    #[serde(default)]
    eps_b: Vec<EpsValue>,
    ladder: Option<Vec<FpFormat>>,
    tau: Option<f64>,
    #[serde(default)]
    norm: BucketNorm,
    i_max: Option<usize>,
    alpha: Option<usize>,
    beta: Option<usize>,
    initial_pattern: Option<InitialPattern>,
    diagnostics: Option<bool>,
    corpus: Option<PathBuf>,
    #[serde(default, rename = "matrix")]
    matrices: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    name: String,
    path: Option<PathBuf>,
    spai_eps: f64,
}

/// Parses `2^-53`, `2e-16` or `1.1e-16`.
pub fn parse_eps(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some(exp) = t.strip_prefix("2^") {
        let e: i32 = exp
            .trim_matches(|c| c == '(' || c == ')')
            .parse()
            .map_err(|_| Error::Config(format!("bad exponent in `{s}`")))?;
        return Ok(2f64.powi(e));
    }
    t.parse().map_err(|_| Error::Config(format!("bad number `{s}`")))
}

/// `2^-53` for exact powers of two, scientific notation otherwise.
pub fn format_eps(x: f64) -> String {
    if x > 0.0 && x.is_finite() {
        let e = x.log2().round() as i32;
        if 2f64.powi(e) == x {
            return format!("2^{e}");
        }
    }
    format!("{x:e}")
}

impl ExperimentSpec {
    /// Parses a spec. Relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let precision: PrecisionTuple = raw.precision.parse()?;
        let eps_b = raw
            .eps_b
            .iter()
            .map(|v| match v {
                EpsValue::Number(x) => Ok(*x),
                EpsValue::Text(s) => parse_eps(s),
            })
            .collect::<Result<Vec<f64>>>()?;
        let corpus = match std::env::var_os(CORPUS_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => base_dir.join(raw.corpus.unwrap_or_else(|| PathBuf::from("."))),
        };
        let matrices = raw
            .matrices
            .into_iter()
            .map(|m| MatrixEntry {
                path: match m.path {
                    Some(p) => base_dir.join(p),
                    None => corpus.join(format!("{}.mtx", m.name)),
                },
                name: m.name,
                spai_eps: m.spai_eps,
            })
            .collect();
        let spec = ExperimentSpec {
            precision,
            eps_b,
            ladder: raw.ladder.unwrap_or_else(|| precision.ladder()),
            tau: raw.tau.unwrap_or_else(|| precision.gmres_tol()),
            norm: raw.norm,
            i_max: raw.i_max.unwrap_or(10),
            alpha: raw.alpha,
            beta: raw.beta.unwrap_or(8),
            initial_pattern: raw.initial_pattern.unwrap_or(InitialPattern::Identity),
            diagnostics: raw.diagnostics.unwrap_or(true),
            matrices,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if let Some(bad) = self.eps_b.iter().find(|&&e| !unit(e)) {
            return Err(Error::Config(format!("bucket target {bad} is not in (0, 1)")));
        }
        if let Some(m) = self.matrices.iter().find(|m| !unit(m.spai_eps)) {
            return Err(Error::Config(format!("SPAI tolerance {} for {} is not in (0, 1)", m.spai_eps, m.name)));
        }
        if !unit(self.tau) {
            return Err(Error::Config(format!("GMRES tolerance {} is not in (0, 1)", self.tau)));
        }
        for &e in &self.eps_b {
            BucketScheme::new(self.ladder.clone(), e, self.norm)?;
        }
        Ok(())
    }

    /// Refinement settings for one matrix and bucket target.
    pub fn ir_config(&self, spai_eps: f64, eps_b: f64) -> IrConfig {
        let mut cfg = IrConfig::for_tuple(self.precision, spai_eps, eps_b);
        cfg.tol = self.tau;
        cfg.i_max = self.i_max;
        cfg.spai.alpha = self.alpha.unwrap_or(usize::MAX);
        cfg.spai.beta = self.beta;
        cfg.spai.initial_pattern = self.initial_pattern;
        cfg.bucket = BucketScheme { precisions: self.ladder.clone(), eps_target: eps_b, norm: self.norm };
        cfg.diagnostics = self.diagnostics;
        cfg
    }
}
