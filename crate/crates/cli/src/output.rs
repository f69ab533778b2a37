//! Tables, number formatting and the CSV/JSON writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};

/// Prefix of metadata lines. `--config` reads these back.
pub const META_PREFIX: &str = "#@";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(round10(*x)),
            Cell::Num(x) => Value::String(fmt_num(*x)),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn round10(x: f64) -> f64 {
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// `x` rounded to 10 significant digits, printed in its shortest form.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let y = round10(x);
    if y == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&y.abs()) {
        format!("{y}")
    } else {
        format!("{y:e}")
    }
}

pub fn metadata_lines(meta: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "{META_PREFIX} {k} = {v}");
    }
    out
}

pub fn to_csv(meta: &BTreeMap<String, String>, table: &Table) -> String {
    let mut out = metadata_lines(meta);
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(meta: &BTreeMap<String, String>, table: &Table, extra: Option<(&str, Value)>) -> String {
    let mut doc = Map::new();
    doc.insert(
        "metadata".into(),
        Value::Object(meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
    );
    doc.insert("columns".into(), json!(table.columns));
    doc.insert(
        "rows".into(),
        Value::Array(
            table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect(),
        ),
    );
    if let Some((k, v)) = extra {
        doc.insert(k.into(), v);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("plain JSON values");
    s.push('\n');
    s
}
