//! Shared command plumbing: configuration resolution, output directory,
//! input hashing, and file emission.

pub mod eigs;
pub mod lift;
pub mod run;
pub mod sweep;

use crate::CommonArgs;
use energyeq_core::config::RunConfig;
use energyeq_core::{Error, Result};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    /// SHA-256 over the resolved configuration and any referenced input
    /// files; recorded in every summary for provenance.
    pub input_hash: String,
}

pub fn load(common: &CommonArgs) -> Result<Context> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse_str(&text)?
        }
        None => RunConfig::default(),
    };
    for assignment in &common.set {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(Error::Config(format!(
                "--set expects KEY=VALUE, got \"{assignment}\""
            )));
        };
        config.apply(key.trim(), value.trim())?;
    }
    if let Some(dir) = &common.out {
        config.output_directory = dir.clone();
    }
    config.validate()?;

    let mut hasher = Sha256::new();
    for (k, v) in config.echo() {
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_bytes());
        hasher.update(b"\n");
    }
    if let Some(file) = &config.velocity_file {
        hasher.update(std::fs::read(file)?);
    }
    let input_hash = format!("{:x}", hasher.finalize());

    let out_dir = config.output_directory.clone();
    std::fs::create_dir_all(&out_dir)?;
    Ok(Context {
        config,
        out_dir,
        input_hash,
    })
}

impl Context {
    pub fn write(&self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, content)?;
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable value");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn wants(&self, format: &str) -> bool {
        self.config.output_formats.iter().any(|f| f == format)
    }

    /// Configuration echo as a JSON object with deterministic key order.
    pub fn config_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .config
            .echo()
            .into_iter()
            .map(|(k, v)| (k, serde_json::Value::String(v)))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Uniform validation instants across the horizon.
pub fn validation_times(horizon: f64) -> Vec<f64> {
    (0..=4).map(|k| horizon * k as f64 / 4.0).collect()
}
