use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;
use crate::error::Result;

/// Per-instance rows in column order, with an optional trailing summary row.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary_row: Option<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.clone()))
                        .collect(),
                )
            })
            .collect()
    }
}

pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub input_hash: String,
    pub derivations: Value,
    pub table: Table,
    pub summary: Map<String, Value>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a Value,
    input_hash: &'a str,
    derivations: &'a Value,
    rows: Vec<Value>,
    #[serde(flatten)]
    summary: &'a Map<String, Value>,
}

/// sha256 of `blob <len>\0<bytes>`, the git object hash with SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    format!("sha256:{}", hex::encode(h.finalize()))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let r = JsonReport {
                    command: self.command,
                    version: env!("CARGO_PKG_VERSION"),
                    config: &self.config,
                    input_hash: &self.input_hash,
                    derivations: &self.derivations,
                    rows: self.table.objects(),
                    summary: &self.summary,
                };
                let mut out = serde_json::to_vec_pretty(&r)?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut out = Vec::new();
                writeln!(out, "# qcomp {} {}", self.command, env!("CARGO_PKG_VERSION"))?;
                writeln!(out, "# config {}", serde_json::to_string(&self.config)?)?;
                writeln!(out, "# input_hash {}", self.input_hash)?;
                if !self.derivations.is_null() {
                    writeln!(out, "# derivations {}", serde_json::to_string(&self.derivations)?)?;
                }
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&self.table.columns)?;
                for r in self.table.rows.iter().chain(&self.table.summary_row) {
                    w.write_record(r.iter().map(cell))?;
                }
                w.flush()?;
                drop(w);
                Ok(out)
            }
        }
    }
}

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
