use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Result;

pub const MANIFEST: &str = "manifest.json";

/// Link-level numbers for one SNR point, shared by all three systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub evm_db: f64,
    /// `-evm_db` of the equalized or combined symbols.
    pub effective_snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub system: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub files: Vec<String>,
    pub metrics: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<SnrPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Collects emitted files and metrics for one run directory.
#[derive(Debug)]
pub struct RunWriter {
    report: RunReport,
}

impl RunWriter {
    pub fn create(dir: &Path, name: &str, system: &str, config_hash: String, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            report: RunReport {
                name: name.to_string(),
                system: system.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash,
                seed,
                files: Vec::new(),
                metrics: BTreeMap::new(),
                points: Vec::new(),
                error: None,
                dir: dir.to_path_buf(),
            },
        })
    }

    pub fn dir(&self) -> &Path {
        &self.report.dir
    }

    /// Writes `header` and one line per row; numbers use the shortest
    /// round-trip form.
    pub fn csv<I, R>(&mut self, file: &str, header: &str, rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let lines = rows.into_iter().map(|r| {
            r.as_ref()
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        });
        self.text_csv(file, header, lines)
    }

    pub fn text_csv<I>(&mut self, file: &str, header: &str, lines: I) -> Result<()>
    where
        I: IntoIterator<Item = String>,
    {
        let mut text = String::from(header);
        text.push('\n');
        for line in lines {
            text.push_str(&line);
            text.push('\n');
        }
        fs::write(self.report.dir.join(file), text)?;
        if !self.report.files.iter().any(|f| f == file) {
            self.report.files.push(file.to_string());
        }
        Ok(())
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.report.metrics.insert(key.to_string(), value.into());
    }

    pub fn points(&mut self, points: Vec<SnrPoint>) {
        self.report.points = points;
    }

    fn write_manifest(&self) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.report)?;
        text.push('\n');
        fs::write(self.report.dir.join(MANIFEST), text)?;
        Ok(())
    }

    pub fn finish(self) -> Result<RunReport> {
        self.write_manifest()?;
        Ok(self.report)
    }

    /// Records the failure next to whatever was already written.
    pub fn fail(mut self, error: &crate::Error) -> Result<RunReport> {
        self.report.error = Some(error.to_string());
        self.write_manifest()?;
        Ok(self.report)
    }
}
