use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::plan::{BenchmarkPlan, Protocol};
use crate::error::{Error, Result};
use crate::filters::FilterConfig;
use crate::metrics::GroupScore;

pub const CSV_HEADER: &str = "input,noise_level,filter,mesr,groups,excluded,kept_ratio,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub protocol: Protocol,
    pub noise_levels: Vec<f64>,
}

impl RunMetadata {
    pub fn for_plan(plan: &BenchmarkPlan) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: plan.seed,
            protocol: plan.protocol,
            noise_levels: plan.noise_levels.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub input: String,
    pub noise_level: f64,
    pub filter: String,
    pub config: FilterConfig,
    /// Absent when no group reached `M` events.
    pub mesr: Option<f64>,
    pub groups: usize,
    pub excluded: usize,
    pub per_group: Vec<GroupScore>,
    pub events_in: u64,
    pub events_kept: u64,
    pub kept_ratio: f64,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFailure {
    pub input: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: RunMetadata,
    pub cells: Vec<CellReport>,
    pub failures: Vec<InputFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` selects JSON; anything else is CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::invalid(format!("unknown report format `{s}` (csv | json)"))),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let mesr = c.mesr.map(|m| format!("{m:.6}")).unwrap_or_default();
            let wall = c.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{}",
                csv_field(&c.input),
                c.noise_level,
                c.filter,
                mesr,
                c.groups,
                c.excluded,
                c.kept_ratio,
                wall
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(format!("report: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("report: {e}")))
    }
}

/// Writes the report and returns the number of bytes written.
pub fn emit_report<W: Write>(report: &BenchmarkReport, format: ReportFormat, mut sink: W) -> Result<u64> {
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => {
            let mut s = report.to_json()?;
            s.push('\n');
            s
        }
    };
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(text.len() as u64)
}
