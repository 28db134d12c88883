//! Measurement rows and CSV emission.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};

pub const CSV_HEADER: &str = "model,size,beta,quantity,n,k,value";

/// One measured value. `n` and `k` are blank in the CSV when absent.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub model: String,
    pub size: usize,
    pub beta: f64,
    pub quantity: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub value: f64,
}

fn opt(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// 17 significant digits round-trip every `f64`.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_csv(rows: &[Measurement]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", r.model, r.size, real(r.beta), r.quantity, opt(r.n), opt(r.k), real(r.value));
    }
    out
}

pub fn emit_csv(rows: &[Measurement], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(rows))?;
    Ok(())
}

/// Inverse of [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<Measurement>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(LabError::Config("CSV header mismatch".into()));
    }
    let bad = |line: &str| LabError::Config(format!("malformed CSV row `{line}`"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad(line));
            }
            let idx = |s: &str| -> Result<Option<usize>> { if s.is_empty() { Ok(None) } else { s.parse().map(Some).map_err(|_| bad(line)) } };
            Ok(Measurement {
                model: f[0].to_string(),
                size: f[1].parse().map_err(|_| bad(line))?,
                beta: f[2].parse().map_err(|_| bad(line))?,
                quantity: f[3].to_string(),
                n: idx(f[4])?,
                k: idx(f[5])?,
                value: f[6].parse().map_err(|_| bad(line))?,
            })
        })
        .collect()
}
