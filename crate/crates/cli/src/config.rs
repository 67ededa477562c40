//! Optional JSON config file mirroring the command-line flags.
//!
//! Every key is optional; a flag given on the command line always wins over
//! the file, and built-in defaults fill whatever remains.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub benchmark: Option<String>,
    pub model: Option<PathBuf>,
    pub test_out: Option<PathBuf>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub features_per_split: Option<usize>,
    pub split: Option<f64>,
    pub seed: Option<u64>,
    pub base_url: Option<String>,
    pub query: Option<String>,
    pub page_size: Option<usize>,
    pub max_records: Option<usize>,
    pub retry_limit: Option<u32>,
    pub timeout_secs: Option<u64>,
    pub backoff_ms: Option<u64>,
    pub mapping: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let file = File::open(path)
            .map_err(|e| format!("cannot open config {}: {e}", path.display()))?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}
