use std::path::Path;

use serde::Deserialize;

/// Optional run configuration; command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub attempts: Option<u64>,
    pub max_results: Option<usize>,
    pub time_limit_secs: Option<u64>,
    /// `all` or `half`.
    pub selection: Option<String>,
    /// `j2`, `exact` or `none`.
    pub dedup: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
