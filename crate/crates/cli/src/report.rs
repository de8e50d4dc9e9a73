use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::config::Resolved;
use crate::spec_file::Truncation;

pub const SCHEMA_VERSION: u32 = 1;

/// Machine-readable outcome of one subcommand. Keys serialize in sorted
/// order and nothing depends on wall-clock time, so equal inputs give equal
/// bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub truncation: Value,
    pub results: Value,
    pub measured: Value,
    pub floors: Value,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, cfg: &Resolved, trunc: &Truncation) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config: serde_json::to_value(cfg).expect("config serializes"),
            truncation: serde_json::json!({
                "K": trunc.k,
                "M": cfg.ymax,
                "N": cfg.order,
                "kmax": cfg.kmax,
            }),
            results: Value::Null,
            measured: Value::Null,
            floors: Value::Null,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        // round-trip through Value so that every object is key-sorted
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

/// A CSV side file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v:e}").expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }
}

/// Report plus side tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub report: Report,
    pub tables: Vec<Table>,
}
