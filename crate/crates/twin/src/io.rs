//! Record files: JSON lines, JSON, CSV, and content digests.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, TwinError};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| TwinError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| TwinError::io(path, e))?))
}

/// Reads one record per non-blank line; a bad line is reported by number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| TwinError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| TwinError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| TwinError::Record {
            path: path.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, records: impl IntoIterator<Item = &'a T>) -> Result<()> {
    let mut w = create(path)?;
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| TwinError::Other(format!("{}: {e}", path.display())))?;
        w.write_all(b"\n").map_err(|e| TwinError::io(path, e))?;
    }
    w.flush().map_err(|e| TwinError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| TwinError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| TwinError::Record {
        path: path.into(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| TwinError::Other(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(|e| TwinError::io(path, e))?;
    w.flush().map_err(|e| TwinError::io(path, e))
}

pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let wrap = |e: csv::Error| TwinError::Other(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref)).map_err(wrap)?;
    }
    w.flush().map_err(|e| TwinError::io(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| TwinError::Other(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| TwinError::Record {
                path: path.into(),
                // header is line 1
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| TwinError::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf).map_err(|e| TwinError::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Requires a file produced by an earlier stage.
pub fn require(path: &Path, stage: &'static str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(TwinError::MissingStage {
            stage,
            path: path.into(),
        })
    }
}

/// One retweet: `source` reposted `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub user: String,
    pub cluster: usize,
}

/// A fixed-precision rendering so emitted tables are byte-stable.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}

/// File-name-safe form of a community name.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    let parts: Vec<&str> = s.split('-').filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        "community".into()
    } else {
        parts.join("-")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use twin_core::demos::Demonstration;

    #[test]
    fn jsonl_round_trip_preserves_unicode() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let demos = vec![
            Demonstration::new("What would you tweet?", "", "naïve “quotes” 🙂"),
            Demonstration::new("Tweet something.", "in", "out"),
        ];
        write_jsonl(&path, &demos).unwrap();
        assert_eq!(read_jsonl::<Demonstration>(&path).unwrap(), demos);
        write_jsonl::<Demonstration>(&path, &[]).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"");
    }

    #[test]
    fn bad_record_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        fs::write(
            &path,
            "{\"instruction\":\"a\",\"output\":\"b\"}\n\n{\"instruction\":\"a\"}\n",
        )
        .unwrap();
        match read_jsonl::<Demonstration>(&path) {
            Err(TwinError::Record { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Keto & Diet"), "keto-diet");
        assert_eq!(slug("Pro-ED"), "pro-ed");
    }
}
