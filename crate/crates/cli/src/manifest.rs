//! Run manifest written next to the experiment outputs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ResolvedConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ResolvedConfig,
    /// SHA-256 of the dataset file bytes, lowercase hex.
    pub dataset_sha256: String,
    pub version: String,
    /// UTC, RFC 3339.
    pub timestamp: String,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: ResolvedConfig, dataset_sha256: String, outputs: Vec<String>) -> Self {
        Self {
            config,
            dataset_sha256,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest is serializable");
        text.push('\n');
        text
    }
}

pub fn fingerprint_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn fingerprint(path: &Path) -> std::io::Result<String> {
    Ok(fingerprint_bytes(&std::fs::read(path)?))
}
