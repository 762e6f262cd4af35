//! Result files: stamped CSV and JSON.
//!
//! Every CSV starts with a `# config_hash=<hex> seed=<n>` comment line and
//! every JSON object carries `config_hash` and `seed` keys. JSON objects are
//! written with sorted keys, floats in shortest round-trip form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Canonical configuration of one invocation. Worker count and output
/// directory are deliberately absent: neither may change any output byte.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub analysis: String,
    pub seed: u64,
    pub settings: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(analysis: &str, seed: u64) -> Self {
        RunConfig {
            analysis: analysis.to_string(),
            seed,
            settings: BTreeMap::new(),
        }
    }

    pub fn set(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("config values serialize");
        self.settings.insert(key.to_string(), v);
        self
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the compact, key-sorted JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&self.to_value()).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn stamp(&self) -> Stamp {
        Stamp {
            config_hash: self.hash(),
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn header_line(&self) -> String {
        format!("# config_hash={} seed={}\n", self.config_hash, self.seed)
    }

    /// Parses a CSV header comment produced by [`Stamp::header_line`].
    pub fn parse_header(line: &str) -> Option<Stamp> {
        let rest = line.trim().strip_prefix('#')?.trim();
        let mut hash = None;
        let mut seed = None;
        for field in rest.split_whitespace() {
            match field.split_once('=')? {
                ("config_hash", v) => hash = Some(v.to_string()),
                ("seed", v) => seed = v.parse().ok(),
                _ => {}
            }
        }
        Some(Stamp {
            config_hash: hash?,
            seed: seed?,
        })
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// A CSV row type with a fixed column list, so empty files still carry a header.
pub trait Record: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

pub fn write_csv<T: Record>(path: &Path, stamp: &Stamp, rows: &[T]) -> Result<()> {
    let mut buf = stamp.header_line().into_bytes();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        w.write_record(T::HEADER).map_err(|e| CliError::input(path, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| CliError::input(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

pub fn read_csv<T: Record>(path: &Path) -> Result<Vec<T>> {
    let text = read_text(path)?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| CliError::input(path, e)))
        .collect()
}

/// Writes `body` (a JSON object) with the stamp and the config echo merged in.
pub fn write_summary(path: &Path, config: &RunConfig, body: Value) -> Result<()> {
    let mut obj = match body {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("config".into(), config.to_value());
    obj.insert("config_hash".into(), Value::String(config.hash()));
    obj.insert("seed".into(), Value::from(config.seed));
    let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("summary serializes");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::input(path, e))
}
