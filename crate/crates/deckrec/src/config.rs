//! Experiment configuration: a JSON file whose keys double as command-line
//! flags, plus the provenance block attached to every result.

use std::path::{Path, PathBuf};

use clap::Args;
use deckrec_core::arith::{parse_rational, Q};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::formats::parse_json;

/// Every key accepted by any command. A key given as a flag overrides the
/// same key from the config file.
#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Population file (simulate, estimate-deck).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<PathBuf>,
    /// First population file (certificate).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<PathBuf>,
    /// Second population file (certificate).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<PathBuf>,
    /// Trace file (estimate-deck, recover).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<PathBuf>,
    /// Population file holding the true population (recover).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    /// Output file: the trace file of `simulate`, otherwise a copy of the
    /// result document. Results are always printed to standard output.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// CSV output file (lowerbound).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// String length, or the size cap of a verification suite.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Support bound.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// Deletion probability as a decimal or `p/q`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    /// Deck order, or the deck-order cap of a verification suite.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Restriction-size cap of the identity suite.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Recovery accuracy as a decimal or `p/q`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<String>,
    /// Explicit number of traces to draw.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Multiplier of the sample-size formula.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    /// Random seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of traces to simulate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    /// Number of random cases in a verification suite.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Comma-separated list of odd string lengths (lowerbound).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    /// Verification suite name.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Range parameter of the damping polynomial (h-properties).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Constant of the negative-side bound (h-properties).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_constant: Option<f64>,
    /// Largest `n` for which recovery scans every string.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool_cap: Option<usize>,
    /// Largest range used to build the damping polynomial (certificate).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_range_cap: Option<u64>,
    /// Largest exponent applied to the damping polynomial (certificate).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_cap: Option<u64>,
    /// Largest `n` of the Delta table (certificate).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    /// Largest `d` of the Delta table (certificate).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_d: Option<usize>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Parses a config document.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let v = parse_json(text, path)?;
        serde_json::from_value(v).map_err(|e| CliError::parse(path, None, e.to_string()))
    }

    /// Reads a config file.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text, path)
    }

    /// `self` with every key present in `overrides` replaced.
    pub fn merged(&self, overrides: &Self) -> Self {
        let mut base = serde_json::to_value(self).expect("config serialises");
        let top = serde_json::to_value(overrides).expect("config serialises");
        if let (Value::Object(b), Value::Object(t)) = (&mut base, top) {
            b.extend(t);
        }
        serde_json::from_value(base).expect("merged config has known keys")
    }

    /// Canonical JSON text of the config, keys in declaration order.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// A required key.
    pub fn need<T: Clone>(value: &Option<T>, key: &str) -> Result<T> {
        value.clone().ok_or_else(|| CliError::config(format!("missing required key \"{key}\"")))
    }

    /// `delta` parsed exactly, or `default` when absent.
    pub fn delta_or(&self, default: Option<&str>) -> Result<Q> {
        let text = match (&self.delta, default) {
            (Some(t), _) => t.clone(),
            (None, Some(d)) => d.to_string(),
            (None, None) => return Err(CliError::config("missing required key \"delta\"")),
        };
        let v = parse_rational(&text).map_err(|e| CliError::config(format!("delta: {e}")))?;
        if v < Q::from_integer(0.into()) || v > Q::from_integer(1.into()) {
            return Err(CliError::config("delta must lie in [0, 1]"));
        }
        Ok(v)
    }

    /// `xi` parsed exactly.
    pub fn xi_exact(&self) -> Result<Q> {
        let text = Self::need(&self.xi, "xi")?;
        parse_rational(&text).map_err(|e| CliError::config(format!("xi: {e}")))
    }
}

/// SHA-256 of a file's bytes.
pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Library version, config hash, seed and hashes of the input files.
pub fn provenance(cfg: &ExperimentConfig, inputs: &[&Path]) -> Result<Value> {
    let mut files = serde_json::Map::new();
    for p in inputs {
        files.insert(p.display().to_string(), json!(file_hash(p)?));
    }
    Ok(json!({
        "tool": "deckrec",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": deckrec_core::VERSION,
        "config_sha256": cfg.hash(),
        "seed": cfg.seed,
        "inputs": files,
    }))
}
