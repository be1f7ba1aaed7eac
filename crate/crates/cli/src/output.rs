use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| Cell::Num(v)).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

/// Outcome of a command: optional table plus the JSON summary parts.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub config: Map<String, Value>,
    pub metrics: Map<String, Value>,
    pub table: Option<Table>,
    pub bound_exceeded: bool,
}

impl Report {
    pub fn new(command: &'static str, config: Map<String, Value>) -> Self {
        Self { command, config, metrics: Map::new(), table: None, bound_exceeded: false }
    }

    pub fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }

    pub fn summary(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "metrics": self.metrics,
            "status": if self.bound_exceeded { "bound_exceeded" } else { "ok" },
        })
    }
}

/// Non-finite numbers have no JSON form; they become strings.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(v.to_string()))
}

pub struct Sink {
    pub format: Format,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

fn write_to(path: &Option<PathBuf>, text: &str, fallback_stderr: bool) -> io::Result<()> {
    match path {
        Some(p) => File::create(p)?.write_all(text.as_bytes()),
        None if fallback_stderr => io::stderr().write_all(text.as_bytes()),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

impl Sink {
    pub fn emit(&self, report: &Report) -> io::Result<()> {
        let summary = serde_json::to_string_pretty(&report.summary()).expect("serializable") + "\n";
        match (self.format, &report.table) {
            (Format::Csv, Some(t)) => {
                write_to(&self.output, &t.to_csv(), false)?;
                write_to(&self.summary, &summary, true)
            }
            _ => {
                write_to(&self.output, &summary, false)?;
                if self.summary.is_some() {
                    write_to(&self.summary, &summary, true)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_significant_digits() {
        let mut t = Table::new(&["x", "y"]);
        t.push_nums(&[0.1, -2.0]);
        t.rows.push(vec![Cell::Num(1.0 / 3.0), Cell::Text("coppel".into())]);
        assert_eq!(t.to_csv(), "x,y\n1.0000000000000001e-1,-2.0000000000000000e0\n3.3333333333333331e-1,coppel\n");
    }

    #[test]
    fn summary_schema() {
        let mut r = Report::new("shoot", Map::new());
        r.metric("B", num(-1.5));
        let v = r.summary();
        assert_eq!(v["command"], "shoot");
        assert_eq!(v["status"], "ok");
        assert_eq!(v["metrics"]["B"], -1.5);
        assert!(v["config"].is_object());
        assert_eq!(num(f64::NAN), Value::String("NaN".into()));
    }
}
