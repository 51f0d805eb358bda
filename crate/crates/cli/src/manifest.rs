//! Run manifests.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{GridSpec, SCHEMA_VERSION};
use crate::formats::{read_json, write_json};
use crate::{CliError, Result};
use mhd25_core::state::Params;

pub const MANIFEST_NAME: &str = "manifest.json";

/// SHA-256 of `"blob <len>\0" ++ bytes`, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

pub fn file_hash(path: &Path) -> Result<String> {
    Ok(content_hash(&std::fs::read(path).map_err(CliError::io(path))?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub params: Option<Params>,
    /// Content hash of the initial-data snapshot.
    #[serde(default)]
    pub initial_hash: Option<String>,
    pub threads: usize,
    pub outputs: Vec<OutputFile>,
    pub summary: serde_json::Value,
    /// Seconds since the epoch; the only field that varies between identical runs.
    pub created_unix: u64,
}

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value, threads: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            grid: None,
            params: None,
            initial_hash: None,
            threads,
            outputs: Vec::new(),
            summary: serde_json::Value::Null,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }

    /// Records `name` (relative to `dir`) with its hash.
    pub fn add_output(&mut self, dir: &Path, name: &str) -> Result<()> {
        let hash = file_hash(&dir.join(name))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            hash,
        });
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_NAME), self)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        read_json(&dir.join(MANIFEST_NAME))
    }
}
