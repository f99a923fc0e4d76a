//! Deterministic artifact writers. CSV floats go through the fixed
//! 12-significant-digit formatter; JSON goes through serde, whose output
//! is stable for a given value.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use farrlaw::format::fmt_sig;

use crate::config::{CliError, TableFormat};

/// One table cell. `Empty` renders as an empty CSV field and JSON null.
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(x) => fmt_sig(*x, 12),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Data(format!("cannot write {}: {e}", path.display()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact value serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn table_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn table_json(header: &[&str], rows: &[Vec<Cell>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in header.iter().zip(row) {
                    obj.insert((*name).to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

/// Writes `{prefix}_{stem}.csv` or `.json` per the format and returns the
/// path written.
pub fn write_table_artifact(
    out_dir: &Path,
    prefix: &str,
    stem: &str,
    format: TableFormat,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> Result<PathBuf, CliError> {
    let ext = match format {
        TableFormat::Csv => "csv",
        TableFormat::Json => "json",
    };
    let path = out_dir.join(format!("{prefix}_{stem}.{ext}"));
    match format {
        TableFormat::Csv => write_bytes(&path, table_csv(header, rows).as_bytes())?,
        TableFormat::Json => write_json(&path, &table_json(header, rows))?,
    }
    Ok(path)
}
