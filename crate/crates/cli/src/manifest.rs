//! Run manifests: what was run, on which bytes, producing which bytes.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: &Path, bytes: &[u8]) -> FileDigest {
        FileDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub budget: u64,
    pub threads: Option<usize>,
    pub parallel: bool,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Digest of whatever went to stdout.
    pub stdout_sha256: String,
    pub tool_version: String,
    pub exit_code: u8,
    pub wall_time_ms: f64,
}
