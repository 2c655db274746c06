//! Markdown, CSV and JSON renderings of result rows.

use std::fmt::Write as _;
use std::str::FromStr;

use super::ResultRow;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::Config(format!("unknown table format `{other}`"))),
        }
    }
}

const HEADER: [&str; 8] =
    ["Matrix", "Precond.", "kappa_inf(MA)", "nnz", "Storage", "GMRES its/step", "Converged", "Error"];

/// `total(a, b, c)`, or just `total` when there are no parts.
fn tuple(total: usize, parts: &[usize]) -> String {
    if parts.is_empty() {
        return total.to_string();
    }
    let inner: Vec<String> = parts.iter().map(usize::to_string).collect();
    format!("{total}({})", inner.join(", "))
}

fn cells(r: &ResultRow) -> [String; 8] {
    if let Some(e) = &r.error {
        return [
            r.matrix.clone(),
            r.preconditioner.clone(),
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            "no".into(),
            e.clone(),
        ];
    }
    // a single bucket is shown without the breakdown
    let occ: &[usize] = if r.occupancy.len() > 1 { &r.occupancy } else { &[] };
    [
        r.matrix.clone(),
        r.preconditioner.clone(),
        r.kappa_ma.map_or_else(|| "-".into(), |k| format!("{k:.1e}")),
        tuple(r.nnz, occ),
        format!("{:.1}%", r.storage_percent),
        tuple(r.total_iterations, &r.iterations_per_step),
        if r.converged { "yes" } else { "no" }.into(),
        String::new(),
    ]
}

pub fn emit_table(rows: &[ResultRow], format: TableFormat) -> Result<String> {
    match format {
        TableFormat::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
        TableFormat::Markdown => {
            let mut out = String::new();
            writeln!(out, "| {} |", HEADER.join(" | ")).unwrap();
            writeln!(out, "|{}", "---|".repeat(HEADER.len())).unwrap();
            for r in rows {
                let c = cells(r).map(|s| s.replace('|', "\\|"));
                writeln!(out, "| {} |", c.join(" | ")).unwrap();
            }
            Ok(out)
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Config(e.to_string());
            w.write_record(HEADER).map_err(io)?;
            for r in rows {
                w.write_record(cells(r)).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

pub fn parse_rows_json(text: &str) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str(text)?)
}
