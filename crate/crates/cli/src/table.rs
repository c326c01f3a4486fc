//! Tabular results and their CSV/JSON encodings.

use std::io::Write;

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Text form used in CSV; floats carry 17 significant digits.
    fn csv_text(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json_text(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format_number(*x),
            Cell::Num(_) => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("string encodes"),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub failed_rows: usize,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            failed_rows: 0,
        }
    }

    pub fn write(&self, format: Format, config: &RunConfig, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(config, out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        w.flush()
    }

    fn write_json(&self, config: &RunConfig, out: &mut dyn Write) -> std::io::Result<()> {
        let cfg = serde_json::to_string(config).map_err(std::io::Error::other)?;
        writeln!(out, "{{")?;
        writeln!(out, "  \"config\": {cfg},")?;
        let cols: Vec<String> = self.columns.iter().map(|c| serde_json::to_string(c).expect("string encodes")).collect();
        writeln!(out, "  \"columns\": [{}],", cols.join(", "))?;
        writeln!(out, "  \"failed_rows\": {},", self.failed_rows)?;
        write!(out, "  \"rows\": [")?;
        for (i, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = cols.iter().zip(row).map(|(k, v)| format!("{k}: {}", v.json_text())).collect();
            let sep = if i == 0 { "" } else { "," };
            write!(out, "{sep}\n    {{{}}}", fields.join(", "))?;
        }
        if !self.rows.is_empty() {
            write!(out, "\n  ")?;
        }
        writeln!(out, "]")?;
        writeln!(out, "}}")
    }
}
