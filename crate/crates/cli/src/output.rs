//! Rendering of command results as JSON, CSV or plain text.

use std::fmt::Write as _;

use clap::ValueEnum;
use gue_expand::functions::format_complex;
use gue_expand::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64.
            Cell::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Tabular view of a result.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// A finished command: machine-readable result plus optional table view
/// and text summary.
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub table: Table,
    pub text: Vec<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": self.command,
                    "config": self.config,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                let _ = writeln!(s, "# schema_version={SCHEMA_VERSION}");
                let _ = writeln!(s, "# command={}", self.command);
                let _ = writeln!(s, "# config={}", self.config);
                let _ = writeln!(s, "{}", self.table.columns.join(","));
                for row in &self.table.rows {
                    let cells: Vec<String> = row.iter().map(Cell::render).collect();
                    let _ = writeln!(s, "{}", cells.join(","));
                }
                s
            }
            Format::Text => {
                let mut s = String::new();
                for line in &self.text {
                    let _ = writeln!(s, "{line}");
                }
                s
            }
        }
    }
}

/// Complex values leave the program as `a+bi` strings.
pub fn cval(z: Complex64) -> Value {
    Value::String(format_complex(z))
}

pub fn cvals(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| cval(z)).collect())
}

/// Finite floats as numbers, others as strings (JSON has no NaN).
pub fn fval(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(v.to_string())
    }
}

pub fn fvals(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| fval(v)).collect())
}

/// Adds `extra` into the object `base`.
pub fn merged(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        let e: Map<String, Value> = e;
        b.extend(e);
    }
    base
}
