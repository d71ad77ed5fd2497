//! Run manifest: what was run, on which inputs, producing which files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub subcommand: String,
    pub started_utc: String,
    pub finished_utc: String,
    pub seed: u64,
    /// Config file path, or `preset:<name>`.
    pub config_source: String,
    /// SHA-256 of the config bytes as read.
    pub config_sha256: String,
    pub warnings: Vec<String>,
    /// Input data file → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name → SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub summary: BTreeMap<String, toml::Value>,
    /// Every configuration key with the value used.
    pub config: BTreeMap<String, toml::Value>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_source: String, config_bytes: &[u8], seed: u64) -> Self {
        Self {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            started_utc: now(),
            finished_utc: String::new(),
            seed,
            config_source,
            config_sha256: sha256_hex(config_bytes),
            warnings: Vec::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            summary: BTreeMap::new(),
            config: BTreeMap::new(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<manifest>", e.to_string()))
    }

    pub fn write(&mut self, path: &Path) -> Result<()> {
        self.finished_utc = now();
        let text = self.to_toml()?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
