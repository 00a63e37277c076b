//! Run manifests written next to every artifact.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use pdsch_bench::lte::tables;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixtures {
    pub mcs_sha256: String,
    pub tbs_sha256: String,
    /// Directory the tables were loaded from; `None` for the embedded copy.
    pub dir: Option<String>,
}

impl Fixtures {
    pub fn current(dir: Option<&Path>) -> Self {
        let c = tables().checksums();
        Self {
            mcs_sha256: c.mcs_sha256.clone(),
            tbs_sha256: c.tbs_sha256.clone(),
            dir: dir.map(|d| d.display().to_string()),
        }
    }

    pub fn same_tables(&self, other: &Fixtures) -> bool {
        self.mcs_sha256 == other.mcs_sha256 && self.tbs_sha256 == other.tbs_sha256
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub os: String,
    pub arch: String,
    pub cpus: usize,
}

impl Host {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Every parameter of the run, defaults included.
    pub params: serde_json::Value,
    pub seed: u64,
    pub fixtures: Fixtures,
    pub tool: String,
    pub version: String,
    pub host: Host,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, seed: u64, fixtures: Fixtures) -> Self {
        Self {
            command: command.into(),
            argv: std::env::args().collect(),
            params,
            seed,
            fixtures,
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            host: Host::current(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
