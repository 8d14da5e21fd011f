//! Output files are written to a temporary sibling and renamed into place, so
//! a failed run never leaves a truncated table behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

/// Sidecar metadata stored next to each output as `<file>.json`.
#[derive(Serialize)]
struct Sidecar<'a> {
    file: String,
    run_config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    schema: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schema_hash: Option<String>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// A CSV table with a header row. Floats use the shortest round-trip form.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: ToString>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(ToString::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// Collects a run's outputs and commits them together, each with a sidecar.
pub struct Outputs<'a> {
    config: &'a RunConfig,
    schema: Option<String>,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl<'a> Outputs<'a> {
    pub fn new(config: &'a RunConfig, schema: Option<String>) -> Self {
        Self { config, schema, files: Vec::new() }
    }

    pub fn add_table(&mut self, name: &str, table: &Table) -> PathBuf {
        self.add_bytes(name, table.to_csv().into_bytes())
    }

    pub fn add_bytes(&mut self, name: &str, bytes: Vec<u8>) -> PathBuf {
        let path = self.config.out.join(name);
        self.files.push((path.clone(), bytes));
        path
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (path, bytes) in &self.files {
            let meta = Sidecar {
                file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                run_config: self.config,
                schema: self.schema.as_deref(),
                schema_hash: self.schema.as_deref().map(crate::config::schema_hash),
            };
            let json = serde_json::to_string_pretty(&meta)? + "\n";
            if let Err(e) = write_atomic(path, bytes).and_then(|()| write_atomic(&sidecar_path(path), json.as_bytes())) {
                for p in written.iter().chain(std::iter::once(path)) {
                    let _ = fs::remove_file(p);
                    let _ = fs::remove_file(sidecar_path(p));
                }
                return Err(e);
            }
            written.push(path.clone());
        }
        Ok(written)
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}
