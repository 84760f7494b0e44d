use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Where the parity-check matrix came from.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeIdentity {
    Geometry { family: String, s: u32 },
    Alist { path: String, sha256: String },
}

/// Sidecar written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub code: CodeIdentity,
    pub seed: u64,
    pub noise_generator: &'static str,
    /// sha256 of the canonical JSON of `code` and `config`.
    pub config_hash: String,
    pub config: C,
    pub output_sha256: String,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(code: CodeIdentity, seed: u64, config: C, output: &[u8]) -> Result<Self> {
        let canonical = serde_json::to_vec(&(&code, &config))?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect(),
            code,
            seed,
            noise_generator: snnbp::channel::NOISE_GENERATOR,
            config_hash: sha256_hex(&canonical),
            config,
            output_sha256: sha256_hex(output),
        })
    }

    pub fn write_beside(&self, output: &Path) -> Result<PathBuf> {
        let path = sidecar_path(output);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
