use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::Format;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run metadata written at the top of every output.
pub struct Meta {
    pub command: &'static str,
    pub seed: u64,
    pub params: Vec<(&'static str, String)>,
}

impl Meta {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Self { command, seed, params: Vec::new() }
    }

    pub fn param(mut self, key: &'static str, value: impl ToString) -> Self {
        self.params.push((key, value.to_string()));
        self
    }

    fn csv_lines(&self) -> String {
        let mut s = format!("# xchg {VERSION}\n# command={} seed={}", self.command, self.seed);
        for (k, v) in &self.params {
            let _ = write!(s, " {k}={v}");
        }
        s.push('\n');
        s
    }

    pub fn to_json(&self) -> Value {
        let params: Map<String, Value> = self.params.iter().map(|(k, v)| (k.to_string(), Value::from(v.clone()))).collect();
        json!({ "version": VERSION, "command": self.command, "seed": self.seed, "params": params })
    }
}

/// Rows of JSON cells under fixed column names.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Meta, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = meta.csv_lines();
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(csv_cell).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                let mut s = serde_json::to_string_pretty(&json!({ "meta": meta.to_json(), "rows": rows }))
                    .expect("JSON values always serialize");
                s.push('\n');
                s
            }
        }
    }
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

pub fn num(x: f64) -> Value {
    // JSON has no NaN or infinity
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn emit(text: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(text.as_bytes())?;
            w.flush()
        }
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// `a..b` (inclusive), `a,b,c` or a single value.
pub fn parse_usize_grid(s: &str) -> Result<Vec<usize>, String> {
    let bad = |_| format!("bad integer grid {s:?}");
    let v: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(bad)?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(bad)?;
        if a > b {
            return Err(format!("empty range {s:?}"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(bad)).collect::<Result<_, _>>()?
    };
    if v.is_empty() {
        return Err(format!("empty grid {s:?}"));
    }
    Ok(v)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?} in {s:?}")))
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(format!("empty list {s:?}"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_usize_grid("3..6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_usize_grid("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_usize_grid("2,5").unwrap(), vec![2, 5]);
        assert_eq!(parse_usize_grid("7").unwrap(), vec![7]);
        assert!(parse_usize_grid("6..3").is_err());
        assert!(parse_usize_grid("x").is_err());
        assert_eq!(parse_f64_list("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_f64_list("0,a").is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_cell(&Value::from("a,b")), "\"a,b\"");
        assert_eq!(csv_cell(&Value::from(1.5)), "1.5");
        assert_eq!(csv_cell(&Value::Null), "");
    }
}
