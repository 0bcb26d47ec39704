use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Floats in CSV exports carry 17 significant digits so they round-trip
/// exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    parameters: &'a BTreeMap<String, serde_json::Value>,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a [String],
}

/// Collects a run's inputs and outputs and writes the manifest next to
/// them. Manifests contain no timestamps: identical config and seed must
/// produce byte-identical output trees.
pub struct RunWriter {
    dir: PathBuf,
    command: String,
    seed: u64,
    parameters: BTreeMap<String, serde_json::Value>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl RunWriter {
    pub fn new(dir: &Path, command: &str, seed: u64) -> Result<Self, String> {
        fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            seed,
            parameters: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    pub fn parameter(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
    }

    /// Records an input file by content digest.
    pub fn input(&mut self, path: &Path) -> Result<(), String> {
        let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), String> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| format!("cannot serialize {name}: {e}"))?;
        self.write_raw(name, text + "\n")
    }

    pub fn write_raw(&mut self, name: &str, contents: String) -> Result<(), String> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), String> {
        self.outputs.push("manifest.json".to_string());
        let manifest = Manifest {
            command: &self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            parameters: &self.parameters,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| format!("cannot serialize manifest: {e}"))?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}
