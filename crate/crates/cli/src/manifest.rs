use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// Written by `synthesize` next to the corrupted image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub seed: u64,
    pub sigma2: f64,
    pub noise_sigma2: f64,
    /// Largest absolute displacement component actually drawn.
    pub rho: u32,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub rng: String,
}

impl Manifest {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("malformed manifest {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
    }
}
