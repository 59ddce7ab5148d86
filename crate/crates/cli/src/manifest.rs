//! Run manifests: everything needed to reproduce an output directory.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zeno_core::system::ModelConfig;

use crate::args::ProbeKindArg;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Resolved command parameters, defaults included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum Invocation {
    Simulate {
        seed: u64,
        paths: u64,
    },
    Check {
        epsilon: Option<f64>,
    },
    Probe {
        seed: u64,
        kind: ProbeKindArg,
        paths: u64,
        horizon: Option<f64>,
        segment: usize,
        kmax: Vec<usize>,
        eps1: f64,
        delta: Vec<f64>,
        times: Vec<f64>,
        inner: u64,
        k_from: usize,
        k_to: usize,
        gamma: f64,
        beta: f64,
    },
}

impl Invocation {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Simulate { seed, .. } | Invocation::Probe { seed, .. } => Some(*seed),
            Invocation::Check { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub invocation: Invocation,
    pub config: ModelConfig,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes each output and the manifest listing them.
pub fn write_outputs(
    dir: &Path,
    invocation: &Invocation,
    config: &ModelConfig,
    threads: Option<usize>,
    files: &[(String, Vec<u8>)],
) -> Result<Manifest, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut outputs = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        outputs.push(OutputEntry { file: name.clone(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed: invocation.seed(),
        threads,
        invocation: invocation.clone(),
        config: config.clone(),
        outputs,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })
}
