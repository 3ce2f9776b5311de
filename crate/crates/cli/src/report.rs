//! Artifact writing: plot-ready CSV tables (floats at 17 significant
//! digits), a JSON summary, and a manifest with a content hash per file.
//! Non-finite values are rejected before anything touches disk.

use std::path::Path;

use serde_json::{Map, Value};

use arcext_core::{Error, Result};

use crate::config::Resolved;

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Renders the table, failing on any non-finite float with the producing
    /// operation named. An empty table renders as the header line alone.
    pub fn to_csv(&self, producer: &str) -> Result<String> {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            let mut first = true;
            for (cell, col) in row.iter().zip(&self.columns) {
                if !first {
                    out.push(',');
                }
                first = false;
                match cell {
                    Cell::Int(v) => out.push_str(&v.to_string()),
                    Cell::Float(v) => {
                        if !v.is_finite() {
                            return Err(Error::NonFinite {
                                op: format!("{producer} (column {col}, row {i})"),
                            });
                        }
                        out.push_str(&format!("{v:.16e}"));
                    }
                }
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// What a task hands back: the main table, optional named side tables, and
/// the summary object.
pub struct TaskOutput {
    pub table: Table,
    pub extra: Vec<(String, Table)>,
    pub summary: Map<String, Value>,
}

/// A finite float as a JSON value; non-finite input is rejected with the
/// producing operation named.
pub fn num(v: f64, producer: &str) -> Result<Value> {
    if !v.is_finite() {
        return Err(Error::NonFinite {
            op: producer.to_string(),
        });
    }
    Ok(Value::from(v))
}

/// Like `num`, but maps non-finite or missing values to null instead of
/// failing; for diagnostics that are legitimately undefined.
pub fn opt_num(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => Value::from(x),
        _ => Value::Null,
    }
}

/// The summary envelope every task carries: tail and aliasing indicators,
/// null where the computation has no such diagnostic.
pub fn diagnostics(tail_ok: Option<bool>, aliased: Option<bool>) -> Value {
    let mut m = Map::new();
    m.insert(
        "tail_ok".to_string(),
        tail_ok.map(Value::Bool).unwrap_or(Value::Null),
    );
    m.insert(
        "aliased".to_string(),
        aliased.map(Value::Bool).unwrap_or(Value::Null),
    );
    Value::Object(m)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
}

/// Writes data.csv, any extra tables, summary.json, and the manifest that
/// records a SHA-256 per written file plus the fully resolved config.
pub fn write_artifacts(resolved: &Resolved, output: TaskOutput) -> Result<()> {
    let dir = &resolved.out_dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::invalid(format!("cannot create {}: {e}", dir.display())))?;

    let mut written: Vec<(String, String)> = Vec::new();

    let csv = output.table.to_csv(&resolved.command)?;
    written.push(("data.csv".to_string(), csv));
    for (name, table) in &output.extra {
        let rendered = table.to_csv(&format!("{} ({name})", resolved.command))?;
        written.push((name.clone(), rendered));
    }

    let summary = Value::Object(output.summary);
    written.push((
        "summary.json".to_string(),
        format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
    ));

    let mut entries = Vec::new();
    for (name, contents) in &written {
        let path = dir.join(name);
        write_file(&path, contents)?;
        let mut m = Map::new();
        m.insert("file".to_string(), Value::from(name.clone()));
        m.insert("sha256".to_string(), Value::from(sha256_hex(contents)));
        m.insert("bytes".to_string(), Value::from(contents.len() as u64));
        entries.push(Value::Object(m));
    }

    let mut manifest = Map::new();
    manifest.insert("tool".to_string(), Value::from("arcext"));
    manifest.insert(
        "version".to_string(),
        Value::from(env!("CARGO_PKG_VERSION")),
    );
    manifest.insert("command".to_string(), Value::from(resolved.command.clone()));
    manifest.insert(
        "config".to_string(),
        serde_json::to_value(&resolved.cfg).unwrap(),
    );
    manifest.insert("outputs".to_string(), Value::Array(entries));
    write_file(
        &dir.join("manifest.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&Value::Object(manifest)).unwrap()
        ),
    )?;
    Ok(())
}

pub fn sha256_hex(contents: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(contents.as_bytes());
    format!("{:x}", hasher.finalize())
}
