use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Record of one invocation, written next to its outputs even on failure.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub error: Option<String>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn start(command: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            seed,
            started_at: now(),
            finished_at: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            error: None,
        }
    }

    pub fn finish(mut self, path: &Path) -> std::io::Result<()> {
        self.finished_at = now();
        let text = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}

pub fn default_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

/// `dir/stem.<suffix>` next to `out`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}"))
}
