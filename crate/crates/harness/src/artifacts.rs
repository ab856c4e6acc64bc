//! Output directory bookkeeping.
//!
//! Every file written through an [`ArtifactSink`] is listed in
//! `manifest.json` with its SHA-256, so a partial run still leaves a manifest
//! that says what exists and that the run did not complete.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::HarnessError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Artifact {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub complete: bool,
    pub error: Option<String>,
    pub artifacts: Vec<Artifact>,
}

pub struct ArtifactSink {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactSink {
    pub fn create(root: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(root).map_err(|e| io_error(root, e))?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), HarnessError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        self.artifacts.retain(|a| a.path != rel);
        self.artifacts.push(Artifact { path: rel.to_string(), sha256: hex::encode(Sha256::digest(bytes)), bytes: bytes.len() });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), HarnessError> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Runtime(e.to_string()))?;
        text.push(b'\n');
        self.write(rel, &text)
    }

    /// Write `manifest.json`. Artifacts are listed in path order.
    pub fn finish(mut self, command: &str, error: Option<&HarnessError>) -> Result<(), HarnessError> {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            schema_version: bco_core::metrics::SCHEMA_VERSION,
            command: command.to_string(),
            complete: error.is_none(),
            error: error.map(|e| e.to_string()),
            artifacts: self.artifacts,
        };
        let mut text = serde_json::to_vec_pretty(&manifest).map_err(|e| HarnessError::Runtime(e.to_string()))?;
        text.push(b'\n');
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).map_err(|e| io_error(&path, e))
    }
}

fn io_error(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Runtime(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_every_artifact_with_its_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = ArtifactSink::create(dir.path()).unwrap();
        sink.write("b/x.txt", b"abc").unwrap();
        sink.write("a.txt", b"").unwrap();
        sink.finish("run", None).unwrap();
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m["complete"], true);
        let arts = m["artifacts"].as_array().unwrap();
        assert_eq!(arts[0]["path"], "a.txt");
        assert_eq!(arts[0]["sha256"], "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert_eq!(arts[1]["sha256"], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
