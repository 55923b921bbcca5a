//! `run.json` and the other files written into a run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use attractor_core::domain::io::save_field;
use attractor_core::semiflow::SeriesRow;
use attractor_core::spectral::EigenMethod;
use attractor_core::tangent::DimensionReport;
use attractor_core::verify::VerifyReport;
use attractor_core::{BoundReport, ErrorClass, Field, Grid};
use serde::{Deserialize, Serialize};

use crate::config::Formats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConfigError,
    HypothesisViolation,
    NumericalFailure,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ConfigError => 1,
            Status::HypothesisViolation => 2,
            Status::NumericalFailure => 3,
            Status::Inconclusive => 4,
        }
    }

    pub fn from_class(c: ErrorClass) -> Self {
        match c {
            ErrorClass::Input => Status::ConfigError,
            ErrorClass::Hypothesis => Status::HypothesisViolation,
            ErrorClass::Numerical => Status::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub steps: usize,
    pub t_end: f64,
    pub stored_states: usize,
    pub initial: SeriesRow,
    #[serde(rename = "final")]
    pub last: SeriesRow,
    pub snapshots: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub method: EigenMethod,
    pub eigenvalues: Vec<f64>,
    pub lambda0: f64,
    #[serde(rename = "Lambda0")]
    pub big_lambda0: f64,
    pub delta: f64,
    /// Lowest proper values of `A_delta`.
    pub proper_values_adelta: Vec<f64>,
    pub essential_floor: f64,
    /// Proper values of `A_delta` below `(1 - delta) lambda1 / 2`.
    pub n_count: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyReport>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub label: String,
    pub config_hash: String,
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    pub error: Option<String>,
    pub grid: Grid,
    pub config: BTreeMap<String, String>,
    pub outputs: Outputs,
    pub timestamps: Timestamps,
}

/// Writer for one run directory that honours the configured formats.
pub struct OutDir {
    pub dir: PathBuf,
    pub formats: Formats,
}

impl OutDir {
    pub fn create(dir: PathBuf, formats: Formats) -> anyhow::Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, formats })
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        if !self.formats.csv {
            return Ok(());
        }
        write_csv(&self.dir.join(name), header, rows)
    }

    pub fn svg(&self, name: &str, content: &str) -> anyhow::Result<()> {
        if !self.formats.svg {
            return Ok(());
        }
        let p = self.dir.join(name);
        fs::write(&p, content).with_context(|| format!("writing {}", p.display()))
    }

    /// Returns the file name when the field was written.
    pub fn field(&self, name: &str, f: &Field) -> anyhow::Result<Option<String>> {
        if !self.formats.fields {
            return Ok(None);
        }
        save_field(self.dir.join(name), f).with_context(|| format!("writing {name}"))?;
        Ok(Some(name.to_string()))
    }

    pub fn record(&self, r: &RunRecord) -> anyhow::Result<PathBuf> {
        let p = self.dir.join("run.json");
        let mut text = serde_json::to_string_pretty(r)?;
        text.push('\n');
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    v.to_string()
}
