//! Output directory bookkeeping: every written file is listed in
//! manifest.json with its SHA-256 digest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandEntry {
    pub files: Vec<FileEntry>,
    pub wall_time_s: f64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config_sha256: String,
    /// Keyed by subcommand; re-running a subcommand replaces its entry.
    pub commands: BTreeMap<String, CommandEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the files of one subcommand run.
pub struct Output {
    dir: PathBuf,
    command: String,
    seed: u64,
    files: Vec<FileEntry>,
    start: Instant,
}

impl Output {
    pub fn new(dir: &Path, command: &str, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), command: command.to_string(), seed, files: Vec::new(), start: Instant::now() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    /// Pretty JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Merges this run into the directory's manifest.
    pub fn finish(self, config_json: &str) -> Result<RunManifest> {
        let path = self.dir.join(MANIFEST);
        let config_sha256 = sha256_hex(config_json.as_bytes());
        let mut manifest = std::fs::read_to_string(&path)
            .ok()
            .and_then(|s| serde_json::from_str::<RunManifest>(&s).ok())
            .filter(|m| m.config_sha256 == config_sha256)
            .unwrap_or_else(|| RunManifest {
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                config_sha256: config_sha256.clone(),
                commands: BTreeMap::new(),
            });
        manifest.commands.insert(
            self.command.clone(),
            CommandEntry {
                files: self.files,
                wall_time_s: self.start.elapsed().as_secs_f64(),
                seed: self.seed,
                workers: crate::sampling::worker_count(),
            },
        );
        let mut s = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(manifest)
    }
}

/// Recomputes every digest listed in the manifest of `dir`.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))?;
    let mut bad = Vec::new();
    for entry in m.commands.values() {
        for f in &entry.files {
            match std::fs::read(dir.join(&f.path)) {
                Ok(b) if sha256_hex(&b) == f.sha256 => {}
                _ => bad.push(f.path.clone()),
            }
        }
    }
    Ok(bad)
}
