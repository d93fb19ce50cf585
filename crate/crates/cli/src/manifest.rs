use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Record of one run, written as `<command>.manifest.json` next to the
/// outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    /// Parsed parameters, defaults filled in.
    pub config: serde_json::Value,
    /// Arguments that reproduce the run (without `--out`).
    pub args: Vec<String>,
    pub master_seed: Option<u64>,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    /// File names relative to the manifest.
    pub output_paths: Vec<String>,
}

pub fn manifest_name(command: &str) -> String {
    format!("{command}.manifest.json")
}
