//! Writing artifacts: CSV files, each with a `.json` sidecar, and JSON summaries.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use capwhitham::io::{fmt_sig16, write_csv, FieldSidecar};
use capwhitham::spectral::SpectralField;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub fn versions() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("capwhitham", capwhitham::VERSION),
        ("capwhitham-cli", env!("CARGO_PKG_VERSION")),
    ])
}

#[derive(Serialize)]
struct ProfileSidecar<'a> {
    #[serde(flatten)]
    field: &'a FieldSidecar,
    config_hash: String,
    versions: BTreeMap<&'static str, &'static str>,
}

#[derive(Serialize)]
struct TableSidecar<'a> {
    kind: &'a str,
    columns: &'a [&'a str],
    rows: usize,
    config_hash: String,
    versions: BTreeMap<&'static str, &'static str>,
}

/// Collects written files for one command run.
pub struct Writer<'a> {
    dir: PathBuf,
    cfg: &'a RunConfig,
    pub files: Vec<PathBuf>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_json_file(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

impl<'a> Writer<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(&cfg.out)?;
        Ok(Self {
            dir: cfg.out.clone(),
            cfg,
            files: Vec::new(),
        })
    }

    /// `x,value` profile with abscissae scaled by `x_scale`.
    pub fn profile(
        &mut self,
        name: &str,
        field: &SpectralField<f64>,
        x_scale: f64,
        meta: FieldSidecar,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        write_csv(&mut out, field, x_scale)?;
        out.flush()?;
        let side = ProfileSidecar {
            field: &meta,
            config_hash: self.cfg.hash(),
            versions: versions(),
        };
        write_json_file(&sidecar_path(&path), &side)?;
        self.files.push(path);
        Ok(())
    }

    /// Generic table; numbers are written with 16 significant digits.
    pub fn table(&mut self, name: &str, kind: &str, columns: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "{}", columns.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        let side = TableSidecar {
            kind,
            columns,
            rows: rows.len(),
            config_hash: self.cfg.hash(),
            versions: versions(),
        };
        write_json_file(&sidecar_path(&path), &side)?;
        self.files.push(path);
        Ok(())
    }

    /// JSON summary with the config hash and versions attached.
    pub fn summary(&mut self, name: &str, body: Value) -> Result<Value, CliError> {
        let mut obj = match body {
            Value::Object(m) => m,
            other => {
                let mut m = serde_json::Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        obj.insert("config_hash".into(), json!(self.cfg.hash()));
        obj.insert("versions".into(), json!(versions()));
        let v = Value::Object(obj);
        let path = self.dir.join(name);
        write_json_file(&path, &v)?;
        self.files.push(path);
        Ok(v)
    }
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_sig16(*v),
            Cell::Text(t) => t.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Writes `diagnostic.json` after a numerical failure; errors here are ignored.
pub fn write_diagnostic(cfg: &RunConfig, command: &str, err: &CliError) {
    let body = json!({
        "command": command,
        "kind": err.kind(),
        "exit_code": err.exit_code(),
        "error": err.to_string(),
        "detail": format!("{err:?}"),
        "config_hash": cfg.hash(),
        "config": cfg.to_text(),
        "versions": versions(),
    });
    if std::fs::create_dir_all(&cfg.out).is_ok() {
        let _ = write_json_file(&cfg.out.join("diagnostic.json"), &body);
    }
}
