//! Report envelope shared by every subcommand.
//!
//! Each report carries the tool version, an echo of the configuration, the
//! seed and the SHA-256 of the input file, and nothing time-dependent, so two
//! runs with equal inputs produce byte-identical output.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::Format;
use crate::error::CliError;

pub const TOOL: &str = "attrest";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identity of an input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_bytes(path: &Path, bytes: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// Reads a file and returns its bytes with their digest.
pub fn read_input(path: &Path) -> Result<(Vec<u8>, InputDigest), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let digest = InputDigest::of_bytes(path, &bytes);
    Ok((bytes, digest))
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub results: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(
        command: &'static str,
        config: C,
        seed: Option<u64>,
        inputs: Vec<InputDigest>,
        results: R,
    ) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            seed,
            inputs,
            results,
        }
    }

    /// Renders the report; `body` supplies the human-readable part of text output.
    pub fn render(
        &self,
        format: Format,
        body: impl FnOnce(&R) -> String,
    ) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Text => {
                let config = serde_json::to_string(&self.config)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let mut out = String::new();
                let _ = writeln!(out, "# {} {} {}", self.tool, self.version, self.command);
                let _ = writeln!(out, "# config: {config}");
                if let Some(seed) = self.seed {
                    let _ = writeln!(out, "# seed: {seed}");
                }
                for input in &self.inputs {
                    let _ = writeln!(out, "# input: {} sha256={}", input.path, input.sha256);
                }
                out.push('\n');
                out.push_str(&body(&self.results));
                Ok(out)
            }
        }
    }
}

/// Formats a value for text tables.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e-3 && v.abs() < 1e6 {
        format!("{v:.6}")
    } else {
        format!("{v:.4e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "-".to_string())
}
