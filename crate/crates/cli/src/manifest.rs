//! Run manifest written next to every set of output files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::output::PendingFile;

pub const TOOL_VERSION: &str = concat!("star-noma ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
    /// Data files, one per curve.
    pub files: Vec<String>,
    /// Parameters the run had to assume.
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash,
            seed,
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            files: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut out =
            serde_json::to_vec_pretty(self).map_err(|e| CliError::Runtime(format!("manifest encoding: {e}")))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn write(&self, pending: PendingFile) -> Result<(), CliError> {
        pending.commit(&self.to_json()?).map(|_| ())
    }
}

/// Manifest path for a single output file: `curve.csv` → `curve.manifest.json`.
pub fn manifest_path_for(data: &Path) -> std::path::PathBuf {
    let stem = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    data.with_file_name(format!("{stem}.manifest.json"))
}

fn canonical(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, canonical(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

/// SHA-256 of the value's JSON form with object keys sorted, so the hash
/// depends on content, not on key order in the source file.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String, CliError> {
    let json = serde_json::to_value(value).map_err(|e| CliError::Runtime(format!("config hashing: {e}")))?;
    let text = canonical(json).to_string();
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}
