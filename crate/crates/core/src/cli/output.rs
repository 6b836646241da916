//! CSV and manifest emission.
//!
//! Every artifact is built as a complete string and written once, with
//! `\n` line endings, a header row naming the columns, and floats at
//! 12 significant digits so golden-file comparisons are meaningful.
//! Manifests carry the configuration hash, the resolved seed, and the tool
//! version, and deliberately no timestamps: rerunning a manifest's
//! invocation reproduces its artifacts byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// A float at 12 significant digits, the fixed CSV float format.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.11e}")
    }
}

/// Incremental CSV builder; one header, then rows of preformatted cells.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// Write under `dir/name` and return the file name for the manifest.
    pub fn write(self, dir: &Path, name: &str) -> Result<String> {
        fs::write(dir.join(name), self.text)?;
        Ok(name.to_string())
    }
}

/// Lowercase hex SHA-256 of the raw configuration bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Flag overrides echoed into the manifest.
#[derive(Debug, Default, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

/// Run manifest: everything needed to reproduce the artifacts.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: &'static str,
    pub experiment: String,
    pub config_sha256: String,
    /// Seed actually used after overrides.
    pub seed: u64,
    pub tool: ToolInfo,
    pub overrides: Overrides,
    /// File names written next to this manifest.
    pub outputs: Vec<String>,
    /// PASS/FAIL for verdict-bearing experiments, absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub summary: String,
}

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self { name: "mhk", version: env!("CARGO_PKG_VERSION") }
    }
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .expect("manifest serialization is infallible");
        text.push('\n');
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}
