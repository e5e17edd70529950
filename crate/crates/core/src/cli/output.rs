//! Report documents and their JSON and CSV files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::cache::write_atomic;
use super::RunConfig;
use crate::error::{Error, Result};
use crate::matseq::SeedPair;

/// One pass/fail line.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// What a command hands back for emission.
#[derive(Debug, Default)]
pub struct Outcome {
    /// File stem of the report.
    pub stem: String,
    pub rows: Vec<Value>,
    pub summary: Value,
    pub checks: Vec<Check>,
    /// Extra lines printed before the checks.
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn new(stem: impl Into<String>) -> Self {
        Outcome {
            stem: stem.into(),
            summary: Value::Object(Map::new()),
            ..Default::default()
        }
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect()
    }
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub command: &'a str,
    pub seed: &'a SeedPair,
    pub config: &'a RunConfig,
    pub rows: &'a [Value],
    pub summary: &'a Value,
    pub checks: &'a [Check],
    pub failures: Vec<String>,
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// One CSV line per row; columns are the keys of the first row.
pub fn rows_csv(rows: &[Value]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let Some(Value::Object(first)) = rows.first() else {
        return Ok(String::new());
    };
    let keys: Vec<&String> = first.keys().collect();
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(keys.iter().map(|k| k.as_str())).map_err(csv_err)?;
    for row in rows {
        let rec: Vec<String> = keys.iter().map(|k| row.get(k.as_str()).map(cell).unwrap_or_default()).collect();
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Writes `<stem>.json` and `<stem>.csv`, returning both paths.
pub fn emit(dir: &Path, report: &Report<'_>, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let json = dir.join(format!("{stem}.json"));
    let csv = dir.join(format!("{stem}.csv"));
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    write_atomic(&json, text.as_bytes())?;
    write_atomic(&csv, rows_csv(report.rows)?.as_bytes())?;
    Ok((json, csv))
}
