//! Tabular results and their CSV and JSON renderings.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self { command, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Value of `column` in every row.
    pub fn column(&self, column: &str) -> Vec<&Cell> {
        let i = self.columns.iter().position(|c| *c == column).expect("known column");
        self.rows.iter().map(|r| &r[i]).collect()
    }

    /// CSV preceded by a `# jdoi <version> command=<cmd> config=<hash>` line.
    pub fn write_csv(&self, config_hash: &str, out: impl Write) -> Result<(), BenchError> {
        let mut out = out;
        writeln!(out, "# jdoi {} command={} config={config_hash}", env!("CARGO_PKG_VERSION"), self.command)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, config_hash: &str, out: impl Write) -> Result<(), BenchError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.to_json())).collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "tool": "jdoi",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config_hash": config_hash,
            "rows": rows,
        });
        let mut out = out;
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write(&self, format: Format, config_hash: &str, out: impl Write) -> Result<(), BenchError> {
        match format {
            Format::Csv => self.write_csv(config_hash, out),
            Format::Json => self.write_json(config_hash, out),
        }
    }
}
