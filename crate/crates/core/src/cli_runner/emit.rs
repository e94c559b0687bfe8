use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::manifest::RunManifest;
use crate::error::{Result, SmeError};

/// A CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    /// Numbers are written in their shortest round-trip form.
    pub fn push(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    pub fn push_text(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, dir: &Path, hash: &str) -> Result<()> {
        let path = dir.join(&self.name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# manifest sha256={hash}")?;
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| SmeError::Io(std::io::Error::other(e.to_string()));
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            if r.len() != self.header.len() {
                return Err(SmeError::Dimension(format!(
                    "{}: row of {} fields, header has {}",
                    self.name,
                    r.len(),
                    self.header.len()
                )));
            }
            w.write_record(r).map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Write the tables and `manifest.json` into `dir`, creating it if needed.
/// The manifest's output list is filled in from the tables.
pub fn emit(dir: &Path, tables: &[Table], manifest: &mut RunManifest) -> Result<()> {
    fs::create_dir_all(dir)?;
    manifest.outputs = tables.iter().map(|t| t.name.clone()).collect();
    let hash = manifest.content_hash();
    for t in tables {
        t.write(dir, &hash)?;
    }
    fs::write(dir.join("manifest.json"), manifest.to_json()?)?;
    Ok(())
}
