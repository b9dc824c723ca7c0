//! Columnar numeric tables: CSV with `#` header lines plus a JSON sidecar.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which reloads
//! bit-identically.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    /// Free-text lines written as `#` comments above the column header.
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Sidecar metadata.
    pub meta: Map<String, Value>,
}

/// Sidecar contents written next to every table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: usize,
    pub units: String,
    pub format: String,
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            header: Vec::new(),
            rows: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn with_header(mut self, line: impl Into<String>) -> Self {
        self.header.push(line.into());
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.meta.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Domain(format!("table {} has no column {name}", self.name)))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.name))
    }

    /// Writes `<name>.csv` and `<name>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = self.csv_path(dir);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(&path, e);
        writeln!(w, "# shocknozzle table: {}", self.name).map_err(io)?;
        writeln!(w, "# units: nondimensional").map_err(io)?;
        for line in &self.header {
            writeln!(w, "# {line}").map_err(io)?;
        }
        writeln!(w, "{}", self.columns.join(",")).map_err(io)?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)?;
        let sidecar = Sidecar {
            name: self.name.clone(),
            columns: self.columns.clone(),
            rows: self.rows.len(),
            units: "nondimensional".into(),
            format: "csv, {:.16e}".into(),
            meta: self.meta.clone(),
        };
        write_json(&dir.join(format!("{}.json", self.name)), &sidecar)?;
        Ok(path)
    }

    /// Reads `<dir>/<name>.csv`; malformed cells report their byte offset.
    pub fn read(dir: &Path, name: &str) -> Result<Self> {
        let path = dir.join(format!("{name}.csv"));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let parse_err = |offset: u64, message: String| Error::Parse { path: path.clone(), offset, message };
        let mut header = Vec::new();
        let mut body_start = 0usize;
        for line in text.split_inclusive('\n') {
            match line.strip_prefix('#') {
                Some(rest) => {
                    let rest = rest.trim();
                    if !rest.starts_with("shocknozzle table:") && !rest.starts_with("units:") {
                        header.push(rest.to_string());
                    }
                    body_start += line.len();
                }
                None => break,
            }
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text[body_start..].as_bytes());
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| parse_err(body_start as u64, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        let mut record = csv::StringRecord::new();
        loop {
            let more = reader.read_record(&mut record).map_err(|e| {
                let offset = e.position().map_or(0, |p| p.byte()) + body_start as u64;
                parse_err(offset, e.to_string())
            })?;
            if !more {
                break;
            }
            let start = record.position().map_or(0, |p| p.byte()) + body_start as u64;
            if record.len() != columns.len() {
                return Err(parse_err(start, format!("expected {} fields, found {}", columns.len(), record.len())));
            }
            let mut row = Vec::with_capacity(columns.len());
            let mut offset = start;
            for (k, cell) in record.iter().enumerate() {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(offset, format!("column {}: cannot parse {cell:?} as a number", columns[k])))?;
                row.push(v);
                offset += cell.len() as u64 + 1;
            }
            rows.push(row);
        }
        let meta = match std::fs::read_to_string(dir.join(format!("{name}.json"))) {
            Ok(s) => read_json_str::<Sidecar>(&s, &dir.join(format!("{name}.json")))?.meta,
            Err(_) => Map::new(),
        };
        Ok(Table { name: name.to_string(), columns, header, rows, meta })
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn byte_offset(text: &str, line: usize, column: usize) -> u64 {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)) as u64
}

pub fn read_json_str<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_json_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn reload_is_bit_identical(values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 1..40)) {
            let dir = tempfile::tempdir().unwrap();
            let mut t = Table::new("t", &["a", "b"]).with_header("grid n = 3");
            for v in &values {
                t.push(vec![*v, -v / 3.0]);
            }
            t.write(dir.path()).unwrap();
            let back = Table::read(dir.path(), "t").unwrap();
            prop_assert_eq!(back.columns, t.columns);
            prop_assert_eq!(back.header, t.header);
            for (r, s) in back.rows.iter().zip(&t.rows) {
                for (a, b) in r.iter().zip(s) {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }
    }

    #[test]
    fn corrupt_cell_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t", &["x", "y"]);
        t.push(vec![1.0, 2.0]);
        t.push(vec![3.0, 4.0]);
        let path = t.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let target = "4.0000000000000000e0";
        let at = text.find(target).unwrap();
        std::fs::write(&path, text.replace(target, "4.0x")).unwrap();
        match Table::read(dir.path(), "t") {
            Err(Error::Parse { offset, message, .. }) => {
                assert_eq!(offset as usize, at);
                assert!(message.contains("column y"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_errors_have_offsets() {
        let text = "{\n  \"a\": 1,\n  \"b\": x\n}";
        let e = read_json_str::<serde_json::Value>(text, Path::new("s.json")).unwrap_err();
        match e {
            Error::Parse { offset, .. } => assert_eq!(&text[offset as usize..offset as usize + 1], "x"),
            other => panic!("{other:?}"),
        }
    }
}
