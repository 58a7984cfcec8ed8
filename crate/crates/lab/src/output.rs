//! Buffered output files and the run manifest.
//!
//! Every artifact is rendered in memory first and only written once the
//! command has succeeded, so a failing run leaves no partial files behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{Failure, Outcome};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    /// Seconds since the Unix epoch; the only field that changes between
    /// identical runs.
    pub timestamp: u64,
    /// File name to hex SHA-256 digest.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Default)]
pub struct Artifacts {
    /// `(path, bytes, explicit)`; files that are not explicit are only
    /// written when an output directory is given.
    files: Vec<(PathBuf, Vec<u8>, bool)>,
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Outcome<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(Failure::runtime)?;
    out.push(b'\n');
    Ok(out)
}

pub fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(Failure::runtime)?;
    }
    w.into_inner()
        .map_err(|e| Failure::runtime(anyhow::anyhow!("{e}")))
}

impl Artifacts {
    pub fn new() -> Self {
        Artifacts::default()
    }

    /// Queues a fixed-name file for the output directory.
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes, false));
    }

    /// Queues a file at a path given on the command line, written even
    /// without an output directory.
    pub fn add_path(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes, true));
    }

    pub fn add_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Outcome {
        self.add(name, json_bytes(value)?);
        Ok(())
    }

    pub fn add_csv<T: Serialize>(
        &mut self,
        name: &str,
        rows: impl IntoIterator<Item = T>,
    ) -> Outcome {
        self.add(name, csv_bytes(rows)?);
        Ok(())
    }

    /// Writes the queued files and, when `out_dir` is given, a manifest
    /// listing their digests. Explicit paths are taken relative to the
    /// working directory.
    pub fn write(
        self,
        out_dir: Option<&Path>,
        command: &str,
        config: serde_json::Value,
    ) -> Outcome {
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir)
                .with_context(|| format!("cannot create output directory {}", dir.display()))
                .map_err(Failure::runtime)?;
        }
        let mut outputs = BTreeMap::new();
        for (name, bytes, explicit) in &self.files {
            let path = match (out_dir, explicit) {
                (_, true) => name.clone(),
                (Some(dir), false) => dir.join(name),
                (None, false) => continue,
            };
            fs::write(&path, bytes)
                .with_context(|| format!("cannot write {}", path.display()))
                .map_err(Failure::runtime)?;
            outputs.insert(
                name.display().to_string(),
                hex::encode(Sha256::digest(bytes)),
            );
        }
        if let Some(dir) = out_dir {
            let timestamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            let manifest = RunManifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_owned(),
                config,
                timestamp,
                outputs,
            };
            let path = dir.join(MANIFEST);
            fs::write(&path, json_bytes(&manifest)?)
                .with_context(|| format!("cannot write {}", path.display()))
                .map_err(Failure::runtime)?;
        }
        Ok(())
    }
}
