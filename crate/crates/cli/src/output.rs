use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

/// One CSV cell. Reals use the shortest representation that round-trips.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Flag(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<Option<u64>> for Cell {
    fn from(v: Option<u64>) -> Self {
        v.map_or(Cell::Empty, Cell::Int)
    }
}

#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a command produces: structured results for JSON, a flat table for
/// CSV, and extra summary lines for the CSV header.
pub struct Report {
    pub results: Value,
    pub table: Table,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new<T: Serialize>(results: &T, table: Table) -> Self {
        Self {
            results: serde_json::to_value(results).unwrap_or(Value::Null),
            table,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }
}

fn provenance(seed: u64) -> Value {
    json!({ "seed": seed, "version": env!("CARGO_PKG_VERSION") })
}

pub fn render_json(config: &Map<String, Value>, seed: u64, report: &Report) -> String {
    let doc = json!({
        "config": config,
        "results": report.results,
        "provenance": provenance(seed),
    });
    let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
    s.push('\n');
    s
}

pub fn render_csv(config: &Map<String, Value>, seed: u64, report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# semiexp {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# seed: {seed}");
    let _ = writeln!(s, "# config: {}", Value::Object(config.clone()));
    for n in &report.notes {
        let _ = writeln!(s, "# {n}");
    }
    s.push_str(&report.table.columns.join(","));
    s.push('\n');
    for row in &report.table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, -0.336_224_595_822_857_1, 1e-300, 6.02e23] {
            let text = Cell::Real(v).render();
            assert_eq!(text.parse::<f64>().unwrap(), v);
        }
        assert_eq!(Cell::Real(f64::NEG_INFINITY).render(), "-inf");
        assert_eq!(Cell::Empty.render(), "");
    }

    #[test]
    fn csv_has_commented_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Int(1), Cell::Real(0.5)]);
        let report = Report::new(&json!({}), t).note("trend: x");
        let mut cfg = Map::new();
        cfg.insert("command".into(), Value::from("rate"));
        let out = render_csv(&cfg, 7, &report);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# semiexp"));
        assert_eq!(lines[1], "# seed: 7");
        assert_eq!(lines[4], "a,b");
        assert_eq!(lines[5], "1,0.5");
    }
}
