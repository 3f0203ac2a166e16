//! Results documents in canonical JSON: keys sorted, two-space indent,
//! shortest round-trip floats, trailing newline.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    /// Snapshot of every tunable the run used.
    pub config: Value,
    pub results: Value,
}

impl ResultsDocument {
    pub fn new(experiment: &str, seed: u64, config: &impl Serialize, results: &impl Serialize) -> Result<Self> {
        Ok(ResultsDocument {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_owned(),
            seed,
            config: to_value(config)?,
            results: to_value(results)?,
        })
    }

    pub fn results_as<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.results.clone()).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub(crate) fn to_value(x: &impl Serialize) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Parse(e.to_string()))
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", pad(depth));
        }
        Value::Object(map) if !map.is_empty() => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(depth + 1), Value::String((*k).clone()));
                write_value(&map[k.as_str()], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", pad(depth));
        }
        other => {
            let _ = write!(out, "{other}");
        }
    }
}

pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

/// Writes through a sibling temp file and a rename, so readers never see a
/// partial document.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_canonical_json(v: &Value, path: &Path) -> Result<()> {
    write_atomic(path, canonical_json(v).as_bytes())
}

pub fn write_results(doc: &ResultsDocument, path: &Path) -> Result<()> {
    write_canonical_json(&to_value(doc)?, path)
}

pub fn read_results(path: &Path) -> Result<ResultsDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let found = v
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse(format!("{}: missing schema_version", path.display())))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(Error::SchemaVersionMismatch { found: found as u32, expected: SCHEMA_VERSION });
    }
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
