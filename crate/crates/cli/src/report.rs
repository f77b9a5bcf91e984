//! Named tables and their CSV / JSON emission.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            // Non-finite values have no JSON literal.
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_headers(name: &str, headers: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.headers.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

pub fn render(tables: &[Table], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let obj: Map<String, Value> = tables.iter().map(|t| (t.name.clone(), t.to_json_value())).collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut out = String::new();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                writeln!(out, "# {}", t.name).expect("writing to a String");
                out.push_str(&t.to_csv()?);
            }
            Ok(out)
        }
    }
}

/// Writes one `<name>.<ext>` file per table into `dir`; returns the paths.
pub fn write_tables(tables: &[Table], format: Format, dir: &Path) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for t in tables {
        let body = match format {
            Format::Csv => t.to_csv()?,
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&t.to_json_value()).map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                s
            }
        };
        let path = dir.join(format!("{}.{}", t.name, format.extension()));
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new("demo", &["name", "value", "stderr"]);
        t.push(vec!["a".into(), 0.25.into(), Cell::Empty]);
        t.push(vec!["b".into(), 3usize.into(), 1e-20.into()]);
        assert_eq!(t.to_csv().unwrap(), "name,value,stderr\na,0.25,\nb,3,1e-20\n");
        let v = t.to_json_value();
        assert_eq!(v[0]["stderr"], Value::Null);
        assert_eq!(v[1]["stderr"].as_f64(), Some(1e-20));
        let rendered = render(&[t], Format::Csv).unwrap();
        assert!(rendered.starts_with("# demo\nname,value"));
    }
}
