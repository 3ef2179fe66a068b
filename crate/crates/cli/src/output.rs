//! Run manifest and output files.

use std::fs;
use std::path::{Path, PathBuf};

use amb_emcm::config::to_toml;
use amb_emcm::report::CsvTable;
use amb_emcm::MachineConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Content hash of the loaded configuration. The configuration is written
/// back out from its SI form first, so formatting, comments and key order
/// of the input file do not change the digest.
pub fn config_digest(cfg: &MachineConfig) -> String {
    hex::encode(Sha256::digest(to_toml(cfg).as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub parameters: serde_json::Value,
    pub version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &MachineConfig, parameters: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            config_digest: config_digest(cfg),
            parameters,
            version: VERSION.to_string(),
            timestamp: timestamp(),
        }
    }

    /// Comment lines opening every CSV.
    pub fn header(&self) -> Vec<String> {
        vec![format!("emcm {} {}", self.version, self.command), format!("config sha256 {}", self.config_digest)]
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Everything a command produces, held until the run has succeeded.
pub struct Outputs {
    pub manifest: RunManifest,
    pub tables: Vec<(String, CsvTable)>,
    pub texts: Vec<(String, String)>,
    pub summary: serde_json::Value,
}

impl Outputs {
    pub fn new(manifest: RunManifest) -> Self {
        Self { manifest, tables: Vec::new(), texts: Vec::new(), summary: serde_json::Value::Null }
    }

    pub fn table(&mut self, name: &str, table: CsvTable) {
        self.tables.push((name.to_string(), table));
    }

    /// Writes the tables, extra text files and `summary.json` into `dir`.
    /// Returns the written paths in order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })?;
        let header = self.manifest.header();
        let mut files: Vec<(PathBuf, String)> = self
            .tables
            .iter()
            .map(|(name, t)| (dir.join(name), t.render(&header)))
            .collect();
        for (name, text) in &self.texts {
            files.push((dir.join(name), text.clone()));
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            manifest: &'a RunManifest,
            files: Vec<&'a str>,
            results: &'a serde_json::Value,
        }
        let names = self.tables.iter().map(|(n, _)| n.as_str()).chain(self.texts.iter().map(|(n, _)| n.as_str())).collect();
        let summary = Summary { manifest: &self.manifest, files: names, results: &self.summary };
        let mut json = serde_json::to_string_pretty(&summary).expect("summary serialises");
        json.push('\n');
        files.push((dir.join("summary.json"), json));
        for (path, text) in &files {
            fs::write(path, text).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use amb_emcm::reference_config;

    #[test]
    fn digest_follows_content() {
        let cfg = reference_config();
        assert_eq!(config_digest(&cfg), config_digest(&cfg.clone()));
        let mut heavier = cfg.clone();
        heavier.flywheel_mass += 1.0;
        assert_ne!(config_digest(&cfg), config_digest(&heavier));
    }

    #[test]
    fn header_names_command_and_digest() {
        let m = RunManifest::new("solve", &reference_config(), serde_json::Value::Null);
        let h = m.header();
        assert_eq!(h[0], format!("emcm {VERSION} solve"));
        assert!(h[1].ends_with(&m.config_digest));
    }
}
