//! Run directories and manifests. Result files are written in a fixed
//! order and hashed; only `manifest.json` carries timestamps.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `./runs/<first 12 hex digits of the config hash>`.
pub fn default_run_dir(config_hash: &str) -> PathBuf {
    Path::new("runs").join(&config_hash[..12.min(config_hash.len())])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub files: Vec<ResultFile>,
    pub summary: serde_json::Value,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Collects result files under one directory and writes the manifest.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    manifest: RunManifest,
}

impl RunDir {
    /// `config` is the fully resolved document; its canonical JSON (plus
    /// the command name) is what gets hashed.
    pub fn create(
        out: Option<&Path>,
        command: &str,
        config: &impl Serialize,
        seeds: Vec<u64>,
        workers: usize,
    ) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let canonical = serde_json::to_vec(&serde_json::json!({ "command": command, "config": config }))?;
        let hash = sha256_hex(&canonical);
        let root = out.map(Path::to_path_buf).unwrap_or_else(|| default_run_dir(&hash));
        std::fs::create_dir_all(&root)?;
        Ok(RunDir {
            root,
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                config_hash: hash,
                config,
                seeds,
                workers,
                started_unix: now(),
                finished_unix: 0,
                files: Vec::new(),
                summary: serde_json::Value::Null,
            },
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_hash(&self) -> &str {
        &self.manifest.config_hash
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.manifest.files.push(ResultFile {
            path: rel.into(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn write_json(&mut self, rel: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(rel, &text)
    }

    pub fn finish(mut self, summary: serde_json::Value) -> Result<RunManifest> {
        self.manifest.summary = summary;
        self.manifest.finished_unix = now();
        let mut text = serde_json::to_vec_pretty(&self.manifest)?;
        text.push(b'\n');
        std::fs::write(self.root.join(MANIFEST_FILE), text)?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_and_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = RunDir::create(Some(dir.path()), "x", &serde_json::json!({"a": 1}), vec![3], 1).unwrap();
        let h = r.config_hash().to_string();
        r.write("sub/a.txt", b"abc").unwrap();
        let m = r.finish(serde_json::json!({"ok": true})).unwrap();
        assert_eq!(m.files[0].sha256, sha256_hex(b"abc"));
        assert_eq!(h.len(), 64);
        assert!(dir.path().join("sub/a.txt").exists());
        let back: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(default_run_dir(&h), Path::new("runs").join(&h[..12]));
    }
}
