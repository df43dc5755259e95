use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::IoError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// File name relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Written next to every set of outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    /// Resolved configuration (run or sweep) with defaults applied.
    pub config: serde_json::Value,
    pub seed: u64,
    /// Steps between timeseries rows, when a timeseries was written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<u64>,
    pub artifacts: Vec<Artifact>,
    pub wall_clock_seconds: f64,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::Io {
        path: path.into(),
        source: e,
    })?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

impl RunManifest {
    /// Checksums `files` (names inside `dir`) into artifact entries.
    pub fn artifacts_for(dir: &Path, files: &[&str]) -> Result<Vec<Artifact>, IoError> {
        files
            .iter()
            .map(|name| {
                let (sha256, bytes) = sha256_file(&dir.join(name))?;
                Ok(Artifact {
                    path: name.to_string(),
                    sha256,
                    bytes,
                })
            })
            .collect()
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| IoError::Io { path, source: e })
    }

    pub fn read(dir: &Path) -> Result<Self, IoError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| IoError::Io {
            path: path.clone(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| IoError::Format {
            path,
            message: e.to_string(),
        })
    }

    /// Names of artifacts whose current checksum differs from the recorded one.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>, IoError> {
        let mut stale = Vec::new();
        for a in &self.artifacts {
            let (sha, bytes) = sha256_file(&dir.join(&a.path))?;
            if sha != a.sha256 || bytes != a.bytes {
                stale.push(a.path.clone());
            }
        }
        Ok(stale)
    }
}
