//! JSON run manifest written next to every set of outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use verne_core::config::geometry_hash;
use verne_core::sweep::SweepParams;
use verne_core::MachineGeometry;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub geometry_hash: String,
    pub config: String,
    pub params: Option<SweepParams>,
    pub outputs: Vec<String>,
    pub duration_s: f64,
    pub point_count: usize,
    pub slice_count: usize,
    pub extras: Value,
}

impl RunManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        command: &str,
        geom: &MachineGeometry,
        config: &str,
        params: Option<SweepParams>,
        outputs: Vec<PathBuf>,
        start: Instant,
        point_count: usize,
        slice_count: usize,
    ) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            geometry_hash: geometry_hash(geom),
            config: config.to_string(),
            params,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            duration_s: start.elapsed().as_secs_f64(),
            point_count,
            slice_count,
            extras: Value::Null,
        }
    }

    pub fn with_extra(mut self, extras: Value) -> Self {
        self.extras = extras;
        self
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}
