//! Run manifest: the machine-readable receipt written next to every
//! artifact set. It pins the config by content hash, the effective seed,
//! and the package versions, and spells out the command line that
//! reproduces the run. Nothing time- or host-dependent goes in here, so
//! identical (config, seed) runs write identical manifests.

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub run: Run<'a>,
    pub versions: Versions<'a>,
    pub artifacts: Artifacts<'a>,
}

#[derive(Serialize)]
pub struct Run<'a> {
    pub command: &'a str,
    pub config_path: &'a str,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub reproduce: String,
}

#[derive(Serialize)]
pub struct Versions<'a> {
    pub cli: &'a str,
    pub core: &'a str,
}

#[derive(Serialize)]
pub struct Artifacts<'a> {
    pub files: &'a [String],
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

pub fn render(
    command: &str,
    config_path: &str,
    config_bytes: &[u8],
    seed: Option<u64>,
    files: &[String],
) -> Result<String> {
    let reproduce = match seed {
        Some(s) => format!("pressure-lab {command} --config {config_path} --seed {s}"),
        None => format!("pressure-lab {command} --config {config_path}"),
    };
    let manifest = Manifest {
        run: Run {
            command,
            config_path,
            config_sha256: sha256_hex(config_bytes),
            seed,
            reproduce,
        },
        versions: Versions {
            cli: env!("CARGO_PKG_VERSION"),
            core: pressure_lab_core::VERSION,
        },
        artifacts: Artifacts { files },
    };
    Ok(toml::to_string(&manifest)?)
}
