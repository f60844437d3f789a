// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Tabular reports with fixed, locale-independent formatting.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::uniform::fmt17;

/// One CSV cell. Floats print with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::F)
    }

    fn csv(&self) -> String {
        match self {
            Cell::F(v) => fmt17(*v),
            Cell::I(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::I(v) => Value::from(*v),
            Cell::B(v) => Value::from(*v),
            Cell::S(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Verdict { name: name.into(), passed, detail: detail.into() }
    }
}

/// An `x,y` series for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

impl Plot {
    pub fn file_name(&self) -> String {
        format!("plot_{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{}\n", self.x, self.y);
        for (x, y) in &self.points {
            s.push_str(&format!("{},{}\n", fmt17(*x), fmt17(*y)));
        }
        s
    }
}

/// What a subcommand produces, before any file is written.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdicts: Vec<Verdict>,
    pub plots: Vec<Plot>,
    /// Structured extras for report.json.
    pub details: Value,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Report { columns: columns.iter().map(|c| c.to_string()).collect(), details: Value::Null, ..Report::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn verdict(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_fixed_width_scientific() {
        let mut r = Report::new(&["a", "b", "c"]);
        r.push(vec![Cell::F(0.1), Cell::S("x,y".into()), Cell::Empty]);
        assert_eq!(r.to_csv(), "a,b,c\n1.0000000000000001e-1,\"x,y\",\n");
        assert_eq!(r.rows_json()[0]["a"], serde_json::json!(0.1));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -2.5e17, 0.0] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
    }
}
