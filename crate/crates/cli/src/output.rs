//! Whitespace-separated tables with a single header row, and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Shortest round-trip representation; `nan` for missing values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Table { name: name.to_string(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.columns.join(" "));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    tool_version: &'a str,
    files: Vec<String>,
    config: &'a C,
}

/// Where a command's tables go: a directory (plus a manifest) or stdout.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    Dir(PathBuf),
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        out.map_or(Sink::Stdout, Sink::Dir)
    }

    /// Writes every table, then the manifest echoing the resolved config.
    /// Files are staged in the target directory and renamed into place.
    pub fn emit<C: Serialize>(&self, command: &str, config: &C, tables: &[Table]) -> Result<()> {
        match self {
            Sink::Stdout => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                for (i, t) in tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(lock)?;
                    }
                    if tables.len() > 1 {
                        writeln!(lock, "# {}", t.name)?;
                    }
                    lock.write_all(t.render().as_bytes())?;
                }
                Ok(())
            }
            Sink::Dir(dir) => {
                std::fs::create_dir_all(dir)?;
                let manifest = Manifest {
                    command,
                    tool_version: env!("CARGO_PKG_VERSION"),
                    files: tables.iter().map(|t| t.name.clone()).collect(),
                    config,
                };
                let manifest = toml::to_string(&manifest)
                    .map_err(|e| std::io::Error::other(format!("manifest serialization failed: {e}")))?;
                let mut staged = Vec::with_capacity(tables.len() + 1);
                for t in tables {
                    staged.push((stage(dir, t.render().as_bytes())?, dir.join(&t.name)));
                }
                staged.push((stage(dir, manifest.as_bytes())?, dir.join(format!("{command}.manifest.toml"))));
                for (tmp, path) in staged {
                    tmp.persist(&path).map_err(|e| e.error)?;
                }
                Ok(())
            }
        }
    }
}

fn stage(dir: &Path, bytes: &[u8]) -> Result<tempfile::NamedTempFile> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    Ok(tmp)
}
