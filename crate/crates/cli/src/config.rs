//! Settings shared by every subcommand: an optional TOML file whose keys are
//! the long flag names, overridden by flags actually given.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use ffproj_core::subspaces::DEFAULT_SUBSPACE_BUDGET;
use serde::Deserialize;

/// Environment variable holding the default enumeration budget.
pub const BUDGET_VAR: &str = "FFPROJ_BUDGET";

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub p: Option<u64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub big_n: Option<u64>,
    pub delta: Option<String>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub r: Option<u32>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub budget: Option<u64>,
    pub input: Option<PathBuf>,
    pub subspace: Option<PathBuf>,
    pub regime: Option<String>,
    pub builtin: Option<String>,
    pub affine: Option<bool>,
    pub list: Option<bool>,
    pub primes: Option<Vec<u64>>,
    pub grid: Option<Vec<u64>>,
    pub dims: Option<Vec<usize>>,
    pub sets: Option<u64>,
    pub inject_fault: Option<String>,
    pub csv: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// The flag if given, else the config value.
pub fn pick<T: Clone>(flag: Option<T>, file: &Option<T>) -> Option<T> {
    flag.or_else(|| file.clone())
}

pub fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing required setting --{name}"))
}

/// Flag, then config file, then the environment, then the built-in default.
pub fn budget(flag: Option<u64>, file: &ConfigFile) -> Result<u64> {
    if let Some(b) = flag.or(file.budget) {
        return Ok(b);
    }
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{BUDGET_VAR}={v:?} is not an integer")),
        Err(_) => Ok(DEFAULT_SUBSPACE_BUDGET),
    }
}
