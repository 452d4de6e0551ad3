//! Record emission. CSV output is a header row plus data rows with fields
//! in shortest round-trip decimal form; JSON output is a single object
//! `{schema, config, rows}`. Identical `(config, seed)` runs produce
//! byte-identical files regardless of worker count.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;

use super::config::OutputFormat;
use crate::error::{Error, Result};

/// One output field.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // f64 Display is the shortest decimal that round-trips.
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Text(v) => write!(f, "{v}"),
        }
    }
}

/// Rows under a fixed column schema, plus the governing parameters for the
/// JSON envelope.
#[derive(Debug, Clone)]
pub struct RecordSet {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    config: Vec<(String, String)>,
}

impl RecordSet {
    pub fn new(columns: Vec<&'static str>, config: Vec<(String, String)>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            config,
        }
    }

    /// Appends a row; the arity must match the schema and every numeric
    /// value must be finite.
    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Internal(format!(
                "row has {} fields, schema has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (col, v) in self.columns.iter().zip(&row) {
            match v {
                Value::Float(x) if !x.is_finite() => {
                    return Err(Error::Internal(format!(
                        "non-finite value {x} in column '{col}'"
                    )));
                }
                Value::Text(s) if s.contains(',') || s.contains('\n') => {
                    return Err(Error::Internal(format!(
                        "text value '{s}' in column '{col}' would break the CSV layout"
                    )));
                }
                _ => {}
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Writes the records to `path`. An empty record set is an internal error
/// and creates no file.
pub fn emit(records: &RecordSet, format: OutputFormat, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Internal(
            "refusing to emit an empty record set".into(),
        ));
    }
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(records, &mut w)?,
        OutputFormat::Json => write_json(records, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn write_csv<W: Write>(records: &RecordSet, w: &mut W) -> Result<()> {
    writeln!(w, "{}", records.columns().join(","))?;
    for row in records.rows() {
        let mut first = true;
        for v in row {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_json<W: Write>(records: &RecordSet, w: &mut W) -> Result<()> {
    let mut config = serde_json::Map::new();
    for (k, v) in &records.config {
        config.insert(k.clone(), json!(v));
    }
    let rows: Vec<serde_json::Value> = records
        .rows()
        .iter()
        .map(|row| {
            serde_json::Value::Array(
                row.iter()
                    .map(|v| match v {
                        Value::Int(x) => json!(x),
                        Value::Float(x) => json!(x),
                        Value::Text(s) => json!(s),
                    })
                    .collect(),
            )
        })
        .collect();
    let doc = json!({
        "schema": records.columns(),
        "config": serde_json::Value::Object(config),
        "rows": rows,
    });
    serde_json::to_writer(&mut *w, &doc)
        .map_err(|e| Error::Internal(format!("json serialization failed: {e}")))?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RecordSet {
        let mut r = RecordSet::new(
            vec!["step", "t", "norm"],
            vec![("command".into(), "evolve".into()), ("seed".into(), "7".into())],
        );
        r.push(vec![Value::Int(0), Value::Float(0.0), Value::Float(1.0)])
            .unwrap();
        r.push(vec![
            Value::Int(1),
            Value::Float(0.1),
            Value::Float(0.9999999999999),
        ])
        .unwrap();
        r
    }

    #[test]
    fn csv_layout_is_header_then_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit(&sample(), OutputFormat::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "step,t,norm");
        assert_eq!(lines.next().unwrap(), "0,0,1");
        assert_eq!(lines.next().unwrap(), "1,0.1,0.9999999999999");
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn empty_records_produce_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("none.csv");
        let r = RecordSet::new(vec!["a"], vec![]);
        assert!(matches!(
            emit(&r, OutputFormat::Csv, &path),
            Err(Error::Internal(_))
        ));
        assert!(!path.exists());
    }

    #[test]
    fn schema_mismatch_and_non_finite_are_internal_errors() {
        let mut r = RecordSet::new(vec!["a", "b"], vec![]);
        assert!(r.push(vec![Value::Int(1)]).is_err());
        assert!(r
            .push(vec![Value::Float(f64::NAN), Value::Int(0)])
            .is_err());
    }

    #[test]
    fn json_round_trips_values_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let mut r = sample();
        // an awkward float exercises the shortest-round-trip printer
        r.push(vec![
            Value::Int(2),
            Value::Float(0.1 + 0.2),
            Value::Float(1e-17),
        ])
        .unwrap();
        emit(&r, OutputFormat::Json, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["schema"][0], "step");
        assert_eq!(doc["config"]["seed"], "7");
        let rows = doc["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2][1].as_f64().unwrap(), 0.1 + 0.2);
        assert_eq!(rows[2][2].as_f64().unwrap(), 1e-17);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let r = sample();
        let err = emit(
            &r,
            OutputFormat::Csv,
            Path::new("/nonexistent-dir-zzz/out.csv"),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
