//! Run directories: every invocation writes its artifacts into one
//! directory — `config.json` first, then data and report files, then
//! `manifest.json` last as the atomic finish marker.
//!
//! The manifest lists a SHA-256 digest for every other file in the run, so
//! re-running a configuration and comparing manifests checks bitwise
//! reproducibility without diffing the files themselves.  Timestamps live
//! only in the manifest; all other artifacts are pure functions of the
//! configuration.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

pub struct RunDir {
    dir: PathBuf,
    /// (file name, sha256 hex) in write order.
    files: Vec<(String, String)>,
    started_unix_ms: u128,
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunDir {
    /// Opens the explicit directory, or creates a fresh
    /// `<root>/<label>[-k]` under `$BALLAPPROX_OUT` (fallback `./runs`).
    pub fn create(explicit: Option<&Path>, label: &str) -> io::Result<RunDir> {
        let dir = match explicit {
            Some(path) => {
                fs::create_dir_all(path)?;
                path.to_path_buf()
            }
            None => {
                let root = std::env::var_os("BALLAPPROX_OUT")
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("runs"));
                fs::create_dir_all(&root)?;
                let mut k = 1u32;
                loop {
                    let candidate = if k == 1 {
                        root.join(label)
                    } else {
                        root.join(format!("{label}-{k}"))
                    };
                    match fs::create_dir(&candidate) {
                        Ok(()) => break candidate,
                        Err(e) if e.kind() == io::ErrorKind::AlreadyExists => k += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
        };
        Ok(RunDir {
            dir,
            files: Vec::new(),
            started_unix_ms: unix_ms(),
        })
    }

    /// Writes one artifact and records its digest for the manifest.
    pub fn write_file(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        let digest = hex::encode(Sha256::digest(bytes));
        self.files.push((name.to_string(), digest));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON trees serialize");
        text.push('\n');
        self.write_file(name, text.as_bytes())
    }

    /// Writes `manifest.json` — always the last file of a run — and returns
    /// the run directory.
    pub fn finish(
        self,
        command: &str,
        config: &serde_json::Value,
        seed: Option<u64>,
    ) -> io::Result<PathBuf> {
        let files: serde_json::Map<String, serde_json::Value> = self
            .files
            .iter()
            .map(|(name, digest)| (name.clone(), serde_json::Value::String(digest.clone())))
            .collect();
        let manifest = serde_json::json!({
            "command": command,
            "config": config,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "started_unix_ms": self.started_unix_ms as u64,
            "finished_unix_ms": unix_ms() as u64,
            "files": files,
        });
        let mut text = serde_json::to_string_pretty(&manifest).expect("JSON trees serialize");
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(self.dir)
    }
}
