//! CSV and JSON emission. Numbers are written with 17 significant digits so
//! that doubles round-trip exactly; header lines start with `#`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::TOOLKIT_VERSION;

/// Column-oriented numeric table with `#` metadata lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { meta: BTreeMap::new(), columns, rows: Vec::new() }
    }

    /// Adds `config_hash` and `toolkit_version` metadata.
    pub fn stamped(mut self, config_hash: &str) -> Self {
        self.meta.insert("config_hash".into(), config_hash.into());
        self.meta.insert("toolkit_version".into(), TOOLKIT_VERSION.into());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch { expected: self.columns.len(), found: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| format_number(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut t = Table::default();
        let mut have_header = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(m) = line.strip_prefix('#') {
                if let Some((k, v)) = m.trim().split_once('=') {
                    t.meta.insert(k.trim().into(), v.trim().into());
                }
                continue;
            }
            if !have_header {
                t.columns = line.split(',').map(|c| c.trim().to_string()).collect();
                have_header = true;
                continue;
            }
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
            if row.len() != t.columns.len() {
                return Err(Error::Config(format!("line {}: expected {} cells", n + 1, t.columns.len())));
            }
            t.rows.push(row);
        }
        if !have_header {
            return Err(Error::Config("no header row".into()));
        }
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
