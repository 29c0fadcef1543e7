//! Small CSV emit helpers. Floats are written with Rust's shortest
//! round-trip formatting, which is deterministic across runs.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

pub struct Table {
    buf: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match c {
                CsvCell::F(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvCell::U(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvCell::S(v) => {
                    let _ = write!(self.buf, "{v}");
                }
            }
        }
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.buf)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn contents(&self) -> &str {
        &self.buf
    }
}

pub enum CsvCell {
    F(f64),
    U(usize),
    S(String),
}

impl From<f64> for CsvCell {
    fn from(v: f64) -> Self {
        CsvCell::F(v)
    }
}

impl From<usize> for CsvCell {
    fn from(v: usize) -> Self {
        CsvCell::U(v)
    }
}

impl From<&str> for CsvCell {
    fn from(v: &str) -> Self {
        CsvCell::S(v.to_string())
    }
}
