use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tnc_core::{PatternSpec, SolverConfig};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum InputSource {
    /// Raster or raw dump on disk, stored as an absolute path.
    File { path: PathBuf },
    Pattern { spec: PatternSpec },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

/// Quality of the noisy input and of the result against a reference.
/// Non-finite values (identical images) are stored as `null`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quality {
    pub reference: Option<PathBuf>,
    pub psnr_input: Option<f64>,
    pub psnr: Option<f64>,
    pub ssim_input: Option<f64>,
    pub ssim: Option<f64>,
}

/// Everything needed to replay a denoise run, plus what it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub input: InputSource,
    pub noise: Option<Noise>,
    pub reference: Option<PathBuf>,
    pub config: SolverConfig,
    pub raw_output: bool,
    pub out_dir: PathBuf,
    pub artifacts: Vec<String>,
    pub history: String,
    pub iterations: usize,
    pub converged: bool,
    pub initial_energy: Option<f64>,
    pub final_energy: Option<f64>,
    pub wall_time_s: f64,
    pub quality: Option<Quality>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            msg: format!("invalid manifest: {e}"),
        })
    }
}

pub(crate) fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Reads solver parameters from JSON (`.json`) or `key = value` lines.
/// Keys are field names; dashes are accepted in place of underscores.
pub fn load_config(path: &Path) -> Result<SolverConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |msg: String| CliError::Config {
        path: path.to_path_buf(),
        msg,
    };
    if path.extension().is_some_and(|e| e == "json") {
        return serde_json::from_str(&text).map_err(|e| bad(e.to_string()));
    }
    let mut map = serde_json::Map::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let parsed = match serde_json::from_str::<serde_json::Value>(value) {
            Ok(v @ (serde_json::Value::Number(_) | serde_json::Value::Bool(_))) => v,
            _ => serde_json::Value::String(value.trim_matches('"').to_string()),
        };
        map.insert(key, parsed);
    }
    serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| bad(e.to_string()))
}
