//! CSV reports.
//!
//! ```text
//! # bmap exp-scaling
//! # version = v0.1.0
//! # seed = 7
//! # config_hash = <sha-256 hex>
//! # config.weights = stable 1.25
//! # ...
//! k,samples,mean_diam,...
//! 256,2000,4.1250000000000000e1,...
//! # result.slope = 7.4000000000000000e-1
//! ```
//!
//! The body is everything not starting with `#`. Floats carry 17
//! significant digits.

use std::fmt::Write as _;

use crate::config::ExperimentCfg;
use crate::LabError;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(x) => x.to_string(),
            Cell::Float(x) => float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(x) => Some(*x as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub kind: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub results: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(kind: &str, cfg: &ExperimentCfg, columns: &[&'static str]) -> Result<Self, LabError> {
        let mut meta = vec![
            ("version".to_string(), VERSION.to_string()),
            ("seed".to_string(), cfg.seed.to_string()),
            ("config_hash".to_string(), cfg.hash()?),
        ];
        for line in cfg.canonical().lines() {
            let (k, v) = line.split_once(" = ").expect("canonical lines are key = value");
            meta.push((format!("config.{k}"), v.to_string()));
        }
        Ok(Report {
            kind: kind.to_string(),
            meta,
            columns: columns.to_vec(),
            rows: Vec::new(),
            results: Vec::new(),
        })
    }

    pub fn note(&mut self, key: &str, value: &str) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn result(&mut self, key: &str, value: impl Into<Cell>) {
        self.results.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.results.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn render(&self) -> Result<String, LabError> {
        let mut out = String::new();
        writeln!(out, "# bmap {}", self.kind).unwrap();
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let body = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
        out.push_str(std::str::from_utf8(&body).expect("csv of utf-8 fields"));
        for (k, v) in &self.results {
            writeln!(out, "# result.{k} = {}", v.render()).unwrap();
        }
        Ok(out)
    }
}

/// Lines not starting with `#`.
pub fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::WeightSpec;

    #[test]
    fn layout() {
        let cfg = ExperimentCfg::new(WeightSpec::Zero);
        let mut r = Report::new("exp-test", &cfg, &["k", "value", "label"]).unwrap();
        r.push(vec![3usize.into(), 0.1.into(), "a,b".into()]);
        r.result("slope", 0.75);
        let text = r.render().unwrap();
        assert!(text.starts_with("# bmap exp-test\n# version = v"));
        assert_eq!(body(&text), "k,value,label\n3,1.0000000000000001e-1,\"a,b\"\n");
        assert!(text.ends_with("# result.slope = 7.5000000000000000e-1\n"));
        let back = ExperimentCfg::parse(&text).unwrap();
        assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(float(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(float(f64::INFINITY), "inf");
    }
}
