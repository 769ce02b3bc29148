//! Run manifest: configuration echo plus SHA-256 of every emitted file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the manifest's directory.
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
    pub wall_time_s: f64,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok((hex::encode(Sha256::digest(&data)), data.len() as u64))
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(RunManifest {
            tool: "cmchain".into(),
            version: crate::VERSION.into(),
            command: command.into(),
            config: serde_json::to_value(config).map_err(|e| Error::Format(e.to_string()))?,
            files: Vec::new(),
            wall_time_s: 0.0,
        })
    }

    /// Hash `path` (relative to `dir`) and record it.
    pub fn record(&mut self, dir: &Path, path: &Path) -> Result<()> {
        let rel = path.strip_prefix(dir).unwrap_or(path).to_path_buf();
        let (sha256, bytes) = sha256_file(&dir.join(&rel))?;
        self.files.push(FileEntry { path: rel, sha256, bytes });
        Ok(())
    }

    /// Write `manifest.json` into `dir` via a temporary file and rename.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let mut body = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        body.push('\n');
        fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FileStatus {
    Ok,
    Missing,
    Mismatch { expected: String, actual: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub entries: Vec<(PathBuf, FileStatus)>,
}

impl VerifyReport {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|(_, s)| *s == FileStatus::Ok)
    }
}

/// Re-hash every file listed in the manifest at `path` (a manifest file or
/// the directory holding one).
pub fn verify_manifest(path: &Path) -> Result<VerifyReport> {
    let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let dir = file.parent().unwrap_or(Path::new("."));
    let manifest = RunManifest::read(&file)?;
    let entries = manifest
        .files
        .iter()
        .map(|f| {
            let full = dir.join(&f.path);
            let status = if !full.exists() {
                FileStatus::Missing
            } else {
                let (actual, _) = sha256_file(&full)?;
                if actual == f.sha256 {
                    FileStatus::Ok
                } else {
                    FileStatus::Mismatch {
                        expected: f.sha256.clone(),
                        actual,
                    }
                }
            };
            Ok((f.path.clone(), status))
        })
        .collect::<Result<_>>()?;
    Ok(VerifyReport { entries })
}
