//! Run manifest: what went into each stage and what came out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{file_digest, read_json, write_json};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderRecord {
    pub role: String,
    pub identity: String,
    pub calls: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_digest: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub providers: Vec<ProviderRecord>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl StageRecord {
    pub fn provider_calls(&self) -> usize {
        self.providers.iter().map(|p| p.calls).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn path(out: &Path) -> PathBuf {
        out.join("manifest.json")
    }

    pub fn load_or_default(out: &Path) -> Result<Self> {
        let path = Self::path(out);
        if path.is_file() {
            read_json(&path)
        } else {
            Ok(RunManifest::default())
        }
    }

    pub fn save(&self, out: &Path) -> Result<()> {
        write_json(&Self::path(out), self)
    }
}

/// Digests keyed by path relative to `root`.
pub fn digests(root: &Path, paths: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for p in paths {
        let key = p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/");
        out.insert(key, file_digest(p)?);
    }
    Ok(out)
}
