//! Tabular command output in CSV or JSON.
//!
//! Numbers are written in `{:.12e}` scientific notation (`inf`, `-inf`, `nan`
//! for non-finite values) so that re-runs are byte-identical; JSON maps
//! non-finite values to `null`.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::mgf::fmt_num;

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
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

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

/// A named-column table with free-form metadata carried into JSON output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, Value)>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: Value) {
        self.meta.push((key.to_string(), value));
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    /// Header row plus one record per row, LF line endings.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wtr.write_record(&self.columns)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(Cell::to_csv))?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// `{"meta": {...}, "columns": [...], "rows": [[...], ...]}`.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.clone());
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        let doc = json!({ "meta": meta, "columns": self.columns, "rows": rows });
        serde_json::to_writer_pretty(&mut w, &doc)?;
        w.write_all(b"\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "vol", "note"]);
        t.push(vec![0.1.into(), 0.2.into(), "".into()]);
        t.push(vec![(-0.1).into(), f64::NAN.into(), Cell::Text("at bound".into())]);
        t.meta("seed", json!(7));
        t
    }

    #[test]
    fn csv_uses_lf_and_fixed_formatting() {
        let mut out = Vec::new();
        sample().write(Format::Csv, &mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(!s.contains('\r'));
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "x,vol,note");
        assert_eq!(lines[1], "1.000000000000e-1,2.000000000000e-1,");
        assert_eq!(lines[2], "-1.000000000000e-1,nan,at bound");
    }

    #[test]
    fn json_maps_nan_to_null() {
        let mut out = Vec::new();
        sample().write(Format::Json, &mut out).unwrap();
        let v: Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["columns"][1], "vol");
        assert!(v["rows"][1][1].is_null());
        assert_eq!(v["meta"]["seed"], 7);
        assert_eq!(sample().column("note"), Some(2));
    }
}
