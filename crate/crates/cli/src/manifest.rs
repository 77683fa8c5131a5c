use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Everything needed to repeat a run: inputs, resolved options, seed and
/// the tool version. Results are deterministic given these.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub argv: Vec<String>,
    pub scenario_path: Option<PathBuf>,
    pub scenario_hash: Option<String>,
    pub options: Value,
    pub seed: Option<u64>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    /// Extra command-specific facts, e.g. sweep extremes.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub summary: Value,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn new(command: &'static str, options: &impl Serialize, seed: Option<u64>, started: u128) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            argv: std::env::args().collect(),
            scenario_path: None,
            scenario_hash: None,
            options: serde_json::to_value(options).unwrap_or(Value::Null),
            seed,
            started_unix_ms: started,
            finished_unix_ms: started,
            summary: Value::Null,
        }
    }

    pub fn write(mut self, path: &Path) -> std::io::Result<()> {
        self.finished_unix_ms = now_ms();
        let text = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}

/// `out.csv` -> `out.csv.manifest.json`
pub fn alongside(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
