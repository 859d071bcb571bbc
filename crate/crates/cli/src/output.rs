//! Tabular and JSON output.
//!
//! CSV: `#`-prefixed metadata lines (schema version, command, resolved
//! config as compact JSON), a mandatory header row, then data rows. Floats
//! use 17 significant digits so they reparse to the same `f64`.
//!
//! JSON: one object with flat dotted keys; tables are stored under
//! `columns` and `rows`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Header data carried by every output file.
pub struct Meta<'a> {
    pub command: &'a str,
    pub config: Value,
}

/// Flattens nested objects into dotted keys. Arrays stay as values.
pub fn flatten(prefix: &str, value: &Value, out: &mut Map<String, Value>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_owned(), other.clone());
        }
    }
}

fn meta_object(meta: &Meta<'_>) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    out.insert("command".into(), Value::from(meta.command));
    flatten("config", &meta.config, &mut out);
    out
}

pub fn render_table(table: &Table, meta: &Meta<'_>, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "# schema_version={SCHEMA_VERSION}").expect("write to Vec");
            writeln!(buf, "# command={}", meta.command).expect("write to Vec");
            writeln!(buf, "# config={}", meta.config).expect("write to Vec");
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&table.columns).map_err(CliError::csv)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(Cell::to_csv)).map_err(CliError::csv)?;
                }
                w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
        Format::Json => {
            let mut obj = meta_object(meta);
            obj.insert(
                "columns".into(),
                Value::from(table.columns.iter().map(|c| Value::from(*c)).collect::<Vec<_>>()),
            );
            obj.insert(
                "rows".into(),
                Value::Array(
                    table
                        .rows
                        .iter()
                        .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
                        .collect(),
                ),
            );
            Ok(json_text(&Value::Object(obj)))
        }
    }
}

/// Flat JSON summary: metadata keys followed by `payload` flattened.
pub fn render_summary(payload: &Value, meta: &Meta<'_>) -> String {
    let mut obj = meta_object(meta);
    flatten("", payload, &mut obj);
    json_text(&Value::Object(obj))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::write(path, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::write(path, e))
}

/// `<stem><suffix>` next to `primary`.
pub fn companion(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    primary.with_file_name(format!("{stem}{suffix}"))
}
