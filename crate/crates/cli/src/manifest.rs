//! Report envelopes: the resolved config, a manifest of checks, and the
//! command's own report.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// The only field allowed to differ between identical runs.
    pub wall_clock_seconds: f64,
}

/// What a command produced, before it is written out.
pub struct Outcome {
    pub command: &'static str,
    pub config: Value,
    pub checks: Vec<Check>,
    pub report: Value,
    /// Plain-text rendering printed instead of the envelope, when set.
    pub text: Option<String>,
}

impl Outcome {
    pub fn new(command: &'static str, config: impl Serialize, report: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            command,
            config: serde_json::to_value(config)?,
            checks: Vec::new(),
            report: serde_json::to_value(report)?,
            text: None,
        })
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the envelope to `out`, or stdout when absent.
pub fn emit(outcome: &Outcome, started: Instant, out: Option<&Path>) -> Result<()> {
    if let Some(text) = &outcome.text {
        return write_out(text, out);
    }
    let manifest = RunManifest {
        tool: "ffproj",
        version: env!("CARGO_PKG_VERSION"),
        command: outcome.command,
        config_hash: config_hash(&outcome.config),
        checks: outcome.checks.clone(),
        passed: outcome.passed(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let doc = json!({
        "manifest": manifest,
        "config": outcome.config,
        "report": outcome.report,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_out(&text, out)
}

fn write_out(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
