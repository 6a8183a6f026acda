//! Result files: CSV tables with a header and finite values only, JSON
//! documents, and a record of everything written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::tasks::iris::sha256_hex;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

#[macro_export]
#[doc(hidden)]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::runner::output::Cell::from($x)),*] };
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(QrcError::Dimension(format!("row of {} cells for {} columns", row.len(), self.header.len())));
        }
        if let Some(k) = row.iter().position(|c| matches!(c, Cell::Num(v) if !v.is_finite())) {
            return Err(QrcError::Numeric(format!("non-finite value in column {}", self.header[k])));
        }
        if let Some(Cell::Text(t)) = row.iter().find(|c| matches!(c, Cell::Text(t) if t.contains([',', '\n', '"']))) {
            return Err(QrcError::Argument(format!("text cell {t:?} needs quoting")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|c| match c {
                    Cell::Text(t) => t.clone(),
                    Cell::Int(v) => v.to_string(),
                    Cell::Num(v) => v.to_string(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes into one directory and remembers what it wrote.
#[derive(Debug)]
pub struct OutputSink {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputSink {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| QrcError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        let probe = dir.join(".rqrc-write-test");
        fs::write(&probe, b"").map_err(|e| QrcError::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
        fs::remove_file(&probe)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(OutputFile { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<()> {
        self.write_bytes(name, table.to_csv().as_bytes())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| QrcError::Numeric(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Any writer-based exporter, buffered and recorded.
    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write_bytes(name, &buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rejects_bad_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.push(row!["x", 1.5]).unwrap();
        assert!(t.push(row![1usize]).is_err());
        assert!(t.push(row!["y", f64::NAN]).is_err());
        assert!(t.push(row!["y,z", 1.0]).is_err());
        assert_eq!(t.to_csv(), "a,b\nx,1.5\n");
    }

    #[test]
    fn sink_records_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = OutputSink::create(&dir.path().join("nested")).unwrap();
        s.write_bytes("a.txt", b"abc").unwrap();
        s.write_bytes("a.txt", b"abc").unwrap();
        assert_eq!(s.files().len(), 1);
        assert_eq!(s.files()[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(fs::read(dir.path().join("nested/a.txt")).unwrap(), b"abc");
    }
}
