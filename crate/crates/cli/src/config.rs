//! Configuration file and value resolution.
//!
//! Each setting resolves as: command-line flag, then `NARRCLUST_*` environment
//! variable (both handled by clap), then the TOML config file, then the default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Invalid;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub domain_tag: Option<String>,
    pub k: Option<usize>,
    pub w_c: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub normalize: Option<bool>,
    pub fractions: Option<Vec<f64>>,
    pub embedding_endpoint: Option<String>,
    pub batch_size: Option<usize>,
    pub max_per_cluster: Option<usize>,
    pub per_tier: Option<usize>,
    pub jaccard_max: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Invalid> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Invalid(format!("config file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Invalid(format!("config file {}: {e}", path.display())))
    }
}

/// First present value of flag/env, then file, then default.
pub fn pick<T>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

/// A path that must be supplied and must exist.
pub fn existing(cli: Option<PathBuf>, file: Option<PathBuf>, what: &str) -> Result<PathBuf, Invalid> {
    let path = cli.or(file).ok_or_else(|| Invalid(format!("no {what} given")))?;
    if !path.is_file() {
        return Err(Invalid(format!("{what} {} does not exist", path.display())));
    }
    Ok(path)
}

pub fn optional_existing(cli: Option<PathBuf>, file: Option<PathBuf>, what: &str) -> Result<Option<PathBuf>, Invalid> {
    match cli.or(file) {
        None => Ok(None),
        Some(p) if p.is_file() => Ok(Some(p)),
        Some(p) => Err(Invalid(format!("{what} {} does not exist", p.display()))),
    }
}
