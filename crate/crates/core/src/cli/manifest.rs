use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::index_core::{RunConfig, Warning};
use crate::ingest::{CoordinateMode, Rejection};

use super::exit::CliError;

pub const TOOL_NAME: &str = "remoteness";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl InputDigest {
    pub fn of(path: &Path) -> Result<Self, CliError> {
        let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            sha256: sha256_hex(&data),
            bytes: data.len() as u64,
        })
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

#[derive(Debug, Clone, Serialize)]
pub struct YearCount {
    pub year: i32,
    pub places: usize,
}

/// Everything needed to reproduce a compute run. Two runs whose manifests
/// agree in every field but `timestamp` wrote identical outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: String,
    pub coord_mode: CoordinateMode,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    pub years: Vec<YearCount>,
    pub warnings: Vec<Warning>,
    pub rejections: Vec<Rejection>,
    /// SHA-256 of each written output, keyed by output kind.
    pub outputs: BTreeMap<&'static str, String>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut v = serde_json::to_vec_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        v.push(b'\n');
        Ok(v)
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Default manifest location next to the results file: `ri.csv` becomes
/// `ri.manifest.json`.
pub fn default_manifest_path(results: &Path) -> PathBuf {
    results.with_extension("manifest.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_path() {
        assert_eq!(
            default_manifest_path(Path::new("out/ri.csv")),
            PathBuf::from("out/ri.manifest.json")
        );
    }

    #[test]
    fn digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
