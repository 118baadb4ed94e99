//! Run manifests written next to every output file as `<out>.manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub toolkit_version: String,
    /// Input path to hex SHA-256 of its contents.
    pub input_digest: BTreeMap<String, String>,
    /// Unix time in milliseconds.
    pub started: u128,
    pub finished: u128,
}

pub fn now_millis() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: BTreeMap::new(),
            started: now_millis(),
            finished: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) -> &mut Self {
        self.input_digest
            .insert(path.display().to_string(), sha256_hex(bytes));
        self
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Writes `contents` to `out` and the manifest beside it.
    pub fn write_output(&mut self, out: &Path, contents: &[u8]) -> std::io::Result<()> {
        fs::write(out, contents)?;
        self.finished = now_millis();
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        fs::write(Self::path_for(out), json)
    }
}
