//! Tabular reports rendered as CSV (with `#` metadata lines) or JSON.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::info::to_bits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

const JSON_DIGITS: usize = 12;
const CSV_DIGITS: usize = 6;

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// A plain number (probability, count, coefficient of θ).
    Num(f64),
    /// An information quantity held in nats, shown in the report unit.
    Info(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    info: bool,
}

impl Column {
    pub fn plain(name: &str) -> Self {
        Self {
            name: name.into(),
            info: false,
        }
    }

    /// A column of information quantities; `_bits` or `_nats` is appended.
    pub fn info(name: &str) -> Self {
        Self {
            name: name.into(),
            info: true,
        }
    }

    fn header(&self, nats: bool) -> String {
        match (self.info, nats) {
            (false, _) => self.name.clone(),
            (true, false) => format!("{}_bits", self.name),
            (true, true) => format!("{}_nats", self.name),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar facts shown once, before the table.
    pub summary: Vec<(Column, Cell)>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summary(&mut self, column: Column, cell: Cell) {
        self.summary.push((column, cell));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

struct Renderer {
    nats: bool,
    digits: usize,
}

impl Renderer {
    fn number(&self, cell: &Cell) -> Option<f64> {
        match *cell {
            Cell::Num(x) => Some(round_sig(x, self.digits)),
            Cell::Info(x) => Some(round_sig(if self.nats { x } else { to_bits(x) }, self.digits)),
            _ => None,
        }
    }

    fn text(&self, cell: &Cell) -> String {
        if let Some(x) = self.number(cell) {
            let a = x.abs();
            return if a != 0.0 && !(1e-4..1e9).contains(&a) {
                format!("{x:e}")
            } else {
                format!("{x}")
            };
        }
        match cell {
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            _ => String::new(),
        }
    }

    fn json(&self, cell: &Cell) -> Value {
        if let Some(x) = self.number(cell) {
            return if x.is_finite() { json!(x) } else { json!(x.to_string()) };
        }
        match cell {
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            _ => Value::Null,
        }
    }
}

/// Writes `report` preceded by the metadata block.
pub fn render<W: Write>(out: &mut W, report: &Report, meta: &Value, format: Format, nats: bool) -> Result<()> {
    match format {
        Format::Csv => {
            let r = Renderer {
                nats,
                digits: CSV_DIGITS,
            };
            if let Value::Object(map) = meta {
                for (k, v) in map {
                    let text = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    writeln!(out, "# {k}: {text}")?;
                }
            }
            for (col, cell) in &report.summary {
                writeln!(out, "# {}: {}", col.header(nats), r.text(cell))?;
            }
            for note in &report.notes {
                writeln!(out, "# note: {note}")?;
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(report.columns.iter().map(|c| c.header(nats)))?;
            for row in &report.rows {
                w.write_record(row.iter().map(|c| r.text(c)))?;
            }
            let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
            out.write_all(&bytes)?;
        }
        Format::Json => {
            let r = Renderer {
                nats,
                digits: JSON_DIGITS,
            };
            let summary: serde_json::Map<String, Value> = report
                .summary
                .iter()
                .map(|(c, v)| (c.header(nats), r.json(v)))
                .collect();
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|row| Value::Array(row.iter().map(|c| r.json(c)).collect()))
                .collect();
            let doc = json!({
                "meta": meta,
                "summary": summary,
                "notes": report.notes,
                "columns": report.columns.iter().map(|c| c.header(nats)).collect::<Vec<_>>(),
                "rows": rows,
            });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
