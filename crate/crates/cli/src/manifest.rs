use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{write, CliResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(path: &Path, contents: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
        }
    }
}

/// Everything needed to rerun a command. Contains no timestamps, so equal
/// runs produce equal manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<FileRecord>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<FileRecord>,
    pub artifact_version: String,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            inputs: Vec::new(),
            config,
            seed,
            outputs: Vec::new(),
            artifact_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write(path, &self.to_json())
    }
}

/// `<path>.manifest.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
