//! CSV tables and atomic file output.

use crate::error::CliError;
use std::io::Write;
use std::path::Path;

pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_err)?;
        }
        w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("output: {e}"))
}

/// Shortest round-trip representation, so identical runs give identical bytes.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(table: &Table, path: Option<&Path>) -> Result<(), CliError> {
    let bytes = table.to_bytes()?;
    match path {
        None => std::io::stdout().write_all(&bytes).map_err(io_err),
        Some(p) => write_atomic(p, &bytes),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| io_err(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path)
        .map_err(|e| io_err(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
