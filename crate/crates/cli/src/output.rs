//! Tables and summaries; every float is emitted with 12 significant digits.

use serde::Serialize;
use serde_json::{Map, Value};
use std::io::Write;
use std::path::Path;

/// Output schema version, recorded in every JSON summary.
pub const SCHEMA_VERSION: u32 = 1;

/// 12 significant digits in scientific notation.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

/// x rounded to 12 significant digits; nonfinite values become null.
pub fn round12(x: f64) -> Value {
    if x.is_finite() {
        Value::from(fmt12(x).parse::<f64>().expect("formatted float parses"))
    } else {
        Value::Null
    }
}

/// Rounds every float in a JSON tree.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round12(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        v => v,
    }
}

/// Numeric table with named columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|&x| fmt12(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_text(&self, out: &mut impl Write) -> std::io::Result<()> {
        if self.columns.is_empty() {
            return Ok(());
        }
        let width = 19;
        writeln!(out, "{}", self.columns.iter().map(|c| format!("{c:>width$}")).collect::<String>())?;
        for r in &self.rows {
            writeln!(out, "{}", r.iter().map(|&x| format!("{:>width$}", fmt12(x))).collect::<String>())?;
        }
        Ok(())
    }
}

/// Result of one subcommand.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub table: Table,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn set(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.summary.insert(key.to_string(), round_value(v));
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    /// {"schema": 1, "summary": {...}, "columns": [...], "rows": [[...]]}.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self.table.rows.iter().map(|r| Value::Array(r.iter().map(|&x| round12(x)).collect())).collect();
        serde_json::json!({
            "schema": SCHEMA_VERSION,
            "summary": self.summary,
            "columns": self.table.columns,
            "rows": rows,
        })
    }

    pub fn emit(&self, json: bool, csv: Option<&Path>, out: &mut impl Write) -> anyhow::Result<()> {
        if let Some(p) = csv {
            self.table.write_csv(p)?;
        }
        if json {
            writeln!(out, "{}", serde_json::to_string_pretty(&self.to_json())?)?;
        } else {
            self.table.write_text(out)?;
            for (k, v) in &self.summary {
                match v {
                    Value::Number(n) => writeln!(out, "{k} = {}", n.as_f64().map(fmt12).unwrap_or_else(|| n.to_string()))?,
                    v => writeln!(out, "{k} = {v}")?,
                }
            }
        }
        Ok(())
    }
}
