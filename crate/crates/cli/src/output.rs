//! Tables written as CSV (with a `#` header) or as one JSON document.

use std::io::Write;

use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    UInt(u128),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v as i128)
    }
}
impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::UInt(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v as u128)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::UInt(v as u128)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u128)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

/// A decimal with 20 significant digits; exponent notation outside
/// `[1e-5, 1e20)`.
pub fn sig20(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..20).contains(&mag) {
        return format!("{x:.19e}");
    }
    let decimals = (19 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => sig20(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // integers beyond 2^53 stay exact as strings
            Cell::Int(v) if v.unsigned_abs() < 1u128 << 53 => json!(*v as i64),
            Cell::UInt(v) if *v < 1u128 << 53 => json!(*v as u64),
            Cell::Int(v) => json!(v.to_string()),
            Cell::UInt(v) => json!(v.to_string()),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(sig20(*v)),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Null => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `key: value` lines, shown in the CSV header and as JSON fields.
    pub summary: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), summary: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.summary.push((key, value.into()));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn write_table(
    out: &mut dyn Write,
    format: Format,
    command: &str,
    config: &Value,
    table: &Table,
) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "# epsclass {VERSION} {command}")?;
            writeln!(out, "# config {config}")?;
            for (k, v) in &table.summary {
                writeln!(out, "# {k} {}", v.csv())?;
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        table.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect();
            let summary: Map<String, Value> = table.summary.iter().map(|(k, v)| (k.to_string(), v.json())).collect();
            let doc = json!({
                "tool": "epsclass",
                "version": VERSION,
                "command": command,
                "config": config,
                "summary": summary,
                "rows": rows,
            });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_digits() {
        assert_eq!(sig20(0.5), "0.50000000000000000000");
        assert_eq!(sig20(-15.0), "-15.000000000000000000");
        // 2^70 = 1180591620717411303424 is exact in binary
        assert_eq!(sig20(2f64.powi(70)), "1.1805916207174113034e21");
        assert_eq!(sig20(f64::NEG_INFINITY), "-inf");
        assert_eq!(sig20(0.0), "0");
        assert_eq!(sig20(2.935394e16).len(), 21);
    }
}
