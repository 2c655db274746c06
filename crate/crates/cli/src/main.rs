//! `bspai` command-line tool: run experiment specs, check the error bounds,
//! and summarize matrices.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use bspai::harness::{self, emit_table, verify, ExperimentSpec, TableFormat};

#[derive(Parser)]
#[command(name = "bspai", version, about = "Bucketed SPAI preconditioned GMRES-IR experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write a results table.
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Output file, or `-` for stdout.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, default_value = "md", value_parser = ["md", "markdown", "csv", "json"])]
        format: String,
        /// Fail unless every run converged.
        #[arg(long)]
        require_convergence: bool,
    },
    /// Run randomized property checks.
    Verify {
        /// Bucketed and uniform product error bounds, single-bucket identity,
        /// storage ratios and double-double exactness.
        #[arg(long)]
        bounds: bool,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Multiplies the number of random trials.
        #[arg(long, default_value_t = 1)]
        scale: usize,
    },
    /// Print size, norm and condition statistics of a Matrix Market file.
    Info {
        matrix: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn run(spec: PathBuf, out: PathBuf, format: &str, require_convergence: bool) -> Result<bool> {
    let spec = ExperimentSpec::from_file(&spec).with_context(|| format!("reading spec {}", spec.display()))?;
    let rows = harness::run_experiment(&spec);
    let text = emit_table(&rows, format.parse::<TableFormat>()?)?;
    if out.as_os_str() == "-" {
        print!("{text}");
    } else {
        fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} {}: {}", r.matrix, r.preconditioner, r.error.as_deref().unwrap_or_default());
    }
    Ok(!require_convergence || rows.iter().all(|r| r.converged))
}

fn verify_bounds(seed: u64, scale: usize) -> bool {
    let outcomes = verify::run_bound_checks(seed, scale);
    for c in &outcomes {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    outcomes.iter().all(|c| c.passed)
}

fn info(path: PathBuf, json: bool) -> Result<()> {
    let info = harness::matrix_info_file(&path).with_context(|| format!("reading {}", path.display()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&info)?);
        return Ok(());
    }
    let opt = |v: Option<f64>| v.map_or_else(|| "singular".to_string(), |x| format!("{x:.1e}"));
    println!("size            {} x {}", info.n_rows, info.n_cols);
    println!("nnz             {}", info.nnz);
    println!("max nnz/row     {}", info.max_row_nnz);
    println!("||A||_inf       {:.3e}", info.norm_inf);
    println!("max |a_ij|      {:.3e}", info.norm_max);
    println!("kappa_inf(A)    {}", opt(info.kappa_inf));
    println!("cond_2(A^T)     {}", opt(info.cond2_transpose));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { spec, out, format, require_convergence } => run(spec, out, &format, require_convergence),
        Command::Verify { bounds, seed, scale } => {
            if !bounds {
                eprintln!("nothing to verify; pass --bounds");
                return ExitCode::from(2);
            }
            Ok(verify_bounds(seed, scale))
        }
        Command::Info { matrix, json } => info(matrix, json).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
