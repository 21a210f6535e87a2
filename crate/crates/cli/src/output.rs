// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Files written by a run and the manifest that lists them.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

pub const MANIFEST: &str = "manifest.toml";

/// One emitted file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    /// Data rows, header excluded.
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub jobs: usize,
    pub wall_time_s: f64,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Output directory plus the list of what has been written into it.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    /// Create the directory and drop any manifest left by an earlier run.
    pub fn prepare(root: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(root).map_err(|e| io(root, e))?;
        let stale = root.join(MANIFEST);
        if stale.exists() {
            std::fs::remove_file(&stale).map_err(|e| io(&stale, e))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Header plus rows; fields are written as given.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        w.write_record(header).map_err(|e| io(&path, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| io(&path, e))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            rows: rows.len(),
        });
        Ok(())
    }

    /// A single TOML record.
    pub fn record<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let path = self.root.join(name);
        let text = toml::to_string(value).map_err(|e| io(&path, e))?;
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            rows: 1,
        });
        Ok(())
    }

    /// Write the manifest through a temporary file and a rename.
    pub fn finish(self, manifest: &RunManifest) -> Result<PathBuf, Failure> {
        let path = self.root.join(MANIFEST);
        let text = toml::to_string(manifest).map_err(|e| io(&path, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(|e| io(&self.root, e))?;
        tmp.write_all(text.as_bytes()).map_err(|e| io(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| io(&path, e.error))?;
        Ok(path)
    }
}

/// Shortest text that reads back to the same value; empty for missing values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
