//! Report assembly and rendering.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Tsv,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub level: &'static str,
    pub source: String,
    pub message: String,
}

impl Diagnostic {
    pub fn info(source: &str, message: impl Into<String>) -> Self {
        Self { level: "info", source: source.into(), message: message.into() }
    }

    pub fn warning(source: &str, message: impl Into<String>) -> Self {
        Self { level: "warning", source: source.into(), message: message.into() }
    }

    pub fn error(source: &str, message: impl Into<String>) -> Self {
        Self { level: "error", source: source.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.17e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Flat table for CSV/TSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a command hands back to the driver.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Vec<Value>,
    pub table: Table,
    pub diagnostics: Vec<Diagnostic>,
    /// A certification check failed.
    pub failed: bool,
}

impl Outcome {
    pub fn result(&mut self, v: impl Serialize) {
        self.results.push(serde_json::to_value(v).expect("report values serialize"));
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub schema_version: u32,
    pub command: &'a str,
    pub params: &'a BTreeMap<String, Value>,
    pub results: &'a [Value],
    pub diagnostics: &'a [Diagnostic],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<&'a BTreeMap<String, f64>>,
}

pub fn render(report: &Report, table: &Table, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv | Format::Tsv => {
            let delim = if format == Format::Csv { b',' } else { b'\t' };
            let mut w = csv::WriterBuilder::new().delimiter(delim).from_writer(Vec::new());
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
            Ok(w.into_inner()?)
        }
    }
}

pub fn emit(bytes: &[u8], path: Option<&std::path::Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_render_with_seventeen_digits() {
        assert_eq!(Cell::Num(0.5625).render(), "5.62500000000000000e-1");
        assert_eq!(Cell::Num(-1.0 / 3.0).render(), "-3.33333333333333315e-1");
    }

    #[test]
    fn tsv_has_header_and_tabs() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0.into(), true.into()]);
        let params = BTreeMap::new();
        let r = Report { schema_version: 1, command: "x", params: &params, results: &[], diagnostics: &[], timings: None };
        let s = String::from_utf8(render(&r, &t, Format::Tsv).unwrap()).unwrap();
        assert_eq!(s, "a\tb\n1.00000000000000000e0\ttrue\n");
    }
}
