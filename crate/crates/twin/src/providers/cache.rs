//! Content-addressed response cache on disk.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ProviderError, ProviderResult};

/// One JSON file per key under `root/<first two hex digits>/`.
#[derive(Debug)]
pub struct Cache {
    root: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

impl Cache {
    pub fn open(root: impl Into<PathBuf>) -> ProviderResult<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| ProviderError::Cache(format!("{}: {e}", root.display())))?;
        Ok(Cache {
            root,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Hex SHA-256 over length-prefixed parts, so ("ab","c") and ("a","bc")
    /// differ.
    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> ProviderResult<Option<T>> {
        let path = self.path(key);
        match fs::read(&path) {
            Ok(bytes) => {
                let value = serde_json::from_slice(&bytes)
                    .map_err(|e| ProviderError::Cache(format!("{}: {e}", path.display())))?;
                self.hits.fetch_add(1, Ordering::Relaxed);
                Ok(Some(value))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                Ok(None)
            }
            Err(e) => Err(ProviderError::Cache(format!("{}: {e}", path.display()))),
        }
    }

    /// Writes through a temporary file and a rename, so readers never see a
    /// partial entry.
    pub fn put<T: Serialize + ?Sized>(&self, key: &str, value: &T) -> ProviderResult<()> {
        let path = self.path(key);
        let dir = path.parent().expect("entry has a shard directory");
        let err = |e: std::io::Error| ProviderError::Cache(format!("{}: {e}", path.display()));
        fs::create_dir_all(dir).map_err(err)?;
        let tmp = dir.join(format!(
            ".{key}.{}.{}",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let body = serde_json::to_vec(value).map_err(|e| ProviderError::Cache(e.to_string()))?;
        let mut f = fs::File::create(&tmp).map_err(err)?;
        f.write_all(&body).map_err(err)?;
        drop(f);
        fs::rename(&tmp, &path).map_err(err)
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}
