//! Result records and their CSV / JSON serialization.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Format, Scenario};
use crate::error::{Error, Result};
use crate::mixing::MixingReport;

/// Per-point spectral data of the `gap` and `sweep` scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub beta: f64,
    pub gap_single: f64,
    pub gap_re: Option<f64>,
    #[serde(rename = "g_B")]
    pub g_b: Option<f64>,
    /// `gap_re · 2^{|A|} e^{4βKV_max} / min{g_B, 1}`.
    pub theorem_ratio: Option<f64>,
}

impl GapRecord {
    pub const HEADER: [&'static str; 6] = ["J", "beta", "gap_single", "gap_re", "g_B", "theorem_ratio"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl CheckRecord {
    pub const HEADER: [&'static str; 4] = ["name", "passed", "value", "threshold"];

    /// Passes when `value ≤ threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: value <= threshold, value, threshold }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: value >= threshold, value, threshold }
    }

    /// Passes when `value == threshold`.
    pub fn equals(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: value == threshold, value, threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRecord {
    pub beta_omega: f64,
    pub theta_closed: f64,
    pub theta_quadrature: f64,
    pub abs_diff: f64,
}

impl ThetaRecord {
    pub const HEADER: [&'static str; 4] = ["beta_omega", "theta_closed", "theta_quadrature", "abs_diff"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRecord {
    #[serde(rename = "J")]
    pub j: f64,
    pub beta: f64,
    pub gap_single: f64,
    pub gap_re: f64,
    pub phi_star: f64,
    pub phi_mode: String,
}

impl ClassicalRecord {
    pub const HEADER: [&'static str; 6] = ["J", "beta", "gap_single", "gap_re", "phi_star", "phi_mode"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum Records {
    Gap(Vec<GapRecord>),
    Mixing(MixingReport),
    Verify(Vec<CheckRecord>),
    Theta(Vec<ThetaRecord>),
    Classical(Vec<ClassicalRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Gap(r) => r.len(),
            Records::Mixing(m) => m.crossings.len(),
            Records::Verify(r) => r.len(),
            Records::Theta(r) => r.len(),
            Records::Classical(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Numerical tolerances in force for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub bohr_grouping: f64,
    /// Kernel threshold relative to `‖L̂‖`.
    pub kernel_relative: f64,
    pub detailed_balance: f64,
    pub bisection_rtol: f64,
    pub epsilon: f64,
}

/// Dimensions of the largest objects built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub system_dim: usize,
    pub joint_dim: usize,
    pub superoperator_dim: usize,
    pub max_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub tolerances: Tolerances,
    pub dims: Dims,
    /// False when a `verify` check failed.
    pub passed: bool,
    pub records: Records,
    pub wall_time_s: f64,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(format!("JSON encoding: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("report: {e}")))
    }

    /// Records as CSV with a stable header, written even when there are no rows.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("CSV encoding: {e}"));
        match &self.records {
            Records::Gap(rows) => write_rows(&mut w, &GapRecord::HEADER, rows),
            Records::Verify(rows) => write_rows(&mut w, &CheckRecord::HEADER, rows),
            Records::Theta(rows) => write_rows(&mut w, &ThetaRecord::HEADER, rows),
            Records::Classical(rows) => write_rows(&mut w, &ClassicalRecord::HEADER, rows),
            Records::Mixing(m) => write_rows(&mut w, &["state_id", "t_cross"], &m.crossings),
        }
        .map_err(csv_err)?;
        w.into_inner().map_err(|e| Error::InvalidArgument(format!("CSV encoding: {e}")))
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json().map(|s| (s + "\n").into_bytes()),
        }
    }
}

fn write_rows<T: Serialize>(w: &mut csv::Writer<Vec<u8>>, header: &[&str], rows: &[T]) -> csv::Result<()> {
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Write a report to `path`, or to standard output when `path` is `None`.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let bytes = report.encode(format)?;
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
