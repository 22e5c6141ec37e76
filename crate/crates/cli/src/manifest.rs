use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Run record written next to the outputs of every command.
pub struct Manifest {
    command: String,
    argv: Vec<String>,
    config: Map<String, Value>,
    seeds: Map<String, Value>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    start: Instant,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        Manifest {
            command: command.to_string(),
            argv: argv.to_vec(),
            config: Map::new(),
            seeds: Map::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.to_string(), value.into());
    }

    pub fn seed(&mut self, key: &str, value: u64) {
        self.seeds.insert(key.to_string(), value.into());
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) {
        self.inputs.push(path.into());
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    fn digests(paths: &[PathBuf]) -> Result<Vec<Value>, CliError> {
        paths
            .iter()
            .map(|p| {
                Ok(json!({
                    "path": p.display().to_string(),
                    "sha256": sha256_file(p)?,
                }))
            })
            .collect()
    }

    /// Write the manifest to `path`.
    pub fn write(self, path: &Path) -> Result<(), CliError> {
        let value = json!({
            "command": self.command,
            "argv": self.argv,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": Self::digests(&self.inputs)?,
            "outputs": Self::digests(&self.outputs)?,
            "wall_time_secs": self.start.elapsed().as_secs_f64(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        let text = serde_json::to_string_pretty(&value).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}

/// Manifest path for a file output: `<file>.manifest.json`.
pub fn beside(file: &Path) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    file.with_file_name(name)
}
