//! Tabular experiment output: a CSV with one row per grid point and a JSON
//! sidecar holding metadata and assertion outcomes.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::Rational;

pub const SCHEMA_VERSION: u32 = 1;

/// A CSV cell. Rationals are written losslessly as `p/q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Ratio(Rational),
    Text(String),
    Bool(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Ratio(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Rational> for Cell {
    fn from(v: Rational) -> Self {
        Cell::Ratio(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Parses a `p/q` cell back into an exact rational.
pub fn parse_ratio(text: &str) -> Result<Rational> {
    let (p, q) = text
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("not a p/q rational: {text:?}")))?;
    let p: i128 = p.parse().map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
    let q: i128 = q.parse().map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
    if q == 0 {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(p, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub bound: f64,
    /// CSV row the assertion was read from, if any.
    pub row: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub kind: String,
    pub crate_version: String,
    pub spec: serde_json::Value,
    pub seed: u64,
    pub wall_time_secs: f64,
    pub extra: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieveReport {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub assertions: Vec<Assertion>,
    pub extra: serde_json::Value,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    metadata: &'a Metadata,
    columns: &'a [String],
    assertions: &'a [Assertion],
    all_passed: bool,
}

impl SieveReport {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Self {
            kind: kind.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            assertions: Vec::new(),
            extra: serde_json::Value::Null,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn assert_le(&mut self, name: impl Into<String>, observed: f64, bound: f64, row: Option<usize>) {
        self.assertions.push(Assertion {
            name: name.into(),
            pass: observed <= bound,
            observed,
            bound,
            row,
        });
    }

    pub fn assert_lt(&mut self, name: impl Into<String>, observed: f64, bound: f64, row: Option<usize>) {
        self.assertions.push(Assertion {
            name: name.into(),
            pass: observed < bound,
            observed,
            bound,
            row,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
    }

    /// Writes `path` and the sidecar `path.json`.
    pub fn write(&self, path: &Path, metadata: &Metadata) -> Result<PathBuf> {
        let io = |e: std::io::Error| Error::InvalidArgument(format!("{}: {e}", path.display()));
        let bytes = self.to_csv()?;
        File::create(path).and_then(|mut f| f.write_all(&bytes)).map_err(io)?;
        let sidecar = sidecar_path(path);
        let body = Sidecar {
            metadata,
            columns: &self.columns,
            assertions: &self.assertions,
            all_passed: self.all_passed(),
        };
        let text = serde_json::to_string_pretty(&body).map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
        std::fs::write(&sidecar, text + "\n").map_err(io)?;
        Ok(sidecar)
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_round_trip_through_cells() {
        for (p, q) in [(3, 4), (-7, 2), (0, 1), (12, 1)] {
            let r = Rational::new(p, q);
            assert_eq!(parse_ratio(&Cell::Ratio(r).to_string()).unwrap(), r);
        }
        assert!(parse_ratio("3").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut rep = SieveReport::new("count", &["T", "count"]);
        rep.push_row(vec![Cell::from(2u64), Cell::from(4u64)]);
        rep.push_row(vec![Cell::from(3u64), Cell::from(12u64)]);
        rep.assert_le("monotone", 4.0, 12.0, Some(1));
        assert_eq!(rep.to_csv().unwrap(), b"T,count\n2,4\n3,12\n");
        let meta = Metadata {
            schema_version: SCHEMA_VERSION,
            kind: "count".into(),
            crate_version: "test".into(),
            spec: serde_json::json!({}),
            seed: 1,
            wall_time_secs: 0.0,
            extra: serde_json::Value::Null,
        };
        let path = dir.path().join("out.csv");
        let side = rep.write(&path, &meta).unwrap();
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!(json["all_passed"], true);
        assert_eq!(json["metadata"]["schema_version"], SCHEMA_VERSION);
    }
}
