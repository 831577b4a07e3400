//! Bit-stable emission of sweep results and reports as CSV or JSON.
//!
//! Floats are written in Rust's shortest round-trip form, so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::run::{SweepResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}', expected csv or json")),
        }
    }
}

pub const SWEEP_CSV_HEADER: &str =
    "steps,method,mean,std_error,exact_value,bias,var_per_shot,K,bias_bound";

fn float_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_row(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        row.steps,
        row.method,
        row.mean,
        float_field(row.std_error),
        float_field(row.exact_value),
        float_field(row.bias),
        float_field(row.var_per_shot),
        row.truncation_order.map(|k| k.to_string()).unwrap_or_default(),
        float_field(row.bias_bound),
    )
}

/// Render a sweep as CSV; an aborted sweep carries a leading comment
/// line flagging the partial contents.
pub fn sweep_to_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    if let Some(reason) = &result.incomplete {
        let _ = writeln!(out, "# incomplete: {}", reason.replace('\n', " "));
    }
    let _ = writeln!(out, "{SWEEP_CSV_HEADER}");
    for row in &result.rows {
        let _ = writeln!(out, "{}", csv_row(row));
    }
    out
}

pub fn sweep_to_json(result: &SweepResult) -> String {
    let mut json = serde_json::to_string_pretty(result).expect("sweep serializes");
    json.push('\n');
    json
}

pub fn parse_sweep_json(text: &str) -> Result<SweepResult, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Output(format!("sweep JSON parse error: {e}")))
}

pub fn render_sweep(result: &SweepResult, format: Format) -> String {
    match format {
        Format::Csv => sweep_to_csv(result),
        Format::Json => sweep_to_json(result),
    }
}

/// Render the coefficient profile rows `(k, |gamma_k|, log10 |gamma_k|)`.
pub fn gamma_to_csv(rows: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("k,abs_gamma,log10_abs_gamma\n");
    for (k, abs, log10) in rows {
        let _ = writeln!(out, "{k},{abs},{log10}");
    }
    out
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut json = serde_json::to_string_pretty(value).expect("value serializes");
    json.push('\n');
    json
}

/// Write rendered output to a path, or stdout when no path is given.
pub fn write_output(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::Output(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
