//! Trace CSV and JSON report formats, plus dBm conversions.
//!
//! Trace files look like
//!
//! ```text
//! # unit=dbm
//! # rbw_hz=3e1
//! frequency_hz,psd
//! 6.99e6,-8.2e1
//! ```
//!
//! Comment lines carry `key=value` metadata; unknown keys are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimate::{FitResult, LinewidthEstimate};
use crate::grid::FrequencyGrid;
use crate::trace::{PowerUnit, SpectrumTrace};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
const HEADER: &str = "frequency_hz,psd";

pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn linear_to_dbm(mw: f64) -> Result<f64> {
    if mw > 0.0 {
        Ok(10.0 * mw.log10())
    } else {
        Err(Error::Domain(format!("cannot take the log of non-positive power {mw}")))
    }
}

/// A trace plus the free-form metadata carried in its file header.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub trace: SpectrumTrace,
    pub instrument: Option<String>,
    pub timestamp: Option<String>,
}

impl From<SpectrumTrace> for TraceFile {
    fn from(trace: SpectrumTrace) -> Self {
        Self { trace, instrument: None, timestamp: None }
    }
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<SpectrumTrace> {
    read_trace_file(path).map(|f| f.trace)
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<TraceFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text)
}

pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let mut unit = PowerUnit::DbmPerRbw;
    let mut rbw = 0.0;
    let mut instrument = None;
    let mut timestamp = None;
    let mut grid_start = None;
    let mut grid_step = None;
    let mut seen_header = false;
    let mut freqs = Vec::new();
    let mut values = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if seen_header {
                continue;
            }
            let Some((key, value)) = meta.split_once('=') else { continue };
            let value = value.trim();
            let number = |v: &str| {
                v.parse::<f64>().map_err(|_| Error::Parse { line: line_no, message: format!("bad number '{v}'") })
            };
            match key.trim() {
                "unit" => unit = value.parse()?,
                "rbw_hz" => rbw = number(value)?,
                "instrument" => instrument = Some(value.to_string()),
                "timestamp" => timestamp = Some(value.to_string()),
                "grid_start_hz" => grid_start = Some(number(value)?),
                "grid_step_hz" => grid_step = Some(number(value)?),
                _ => {}
            }
            continue;
        }
        if !seen_header {
            let normalized: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            if !normalized.eq_ignore_ascii_case(HEADER) {
                return Err(Error::Schema(format!("line {line_no}: expected header '{HEADER}', found '{line}'")));
            }
            seen_header = true;
            continue;
        }
        let mut cols = line.split(',');
        let (Some(f), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::Parse { line: line_no, message: "expected two columns".into() });
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse { line: line_no, message: format!("bad number '{}'", s.trim()) })
        };
        freqs.push(parse(f)?);
        values.push(parse(v)?);
    }

    if !seen_header {
        return Err(Error::Schema(format!("missing header '{HEADER}'")));
    }
    if freqs.len() < 2 {
        return Err(Error::Schema(format!("a trace needs at least two rows, found {}", freqs.len())));
    }
    if let Some(i) = freqs.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Schema(format!("frequencies not strictly increasing at row {}", i + 2)));
    }
    let n = freqs.len();
    let start = grid_start.unwrap_or(freqs[0]);
    let step = grid_step.unwrap_or((freqs[n - 1] - freqs[0]) / (n - 1) as f64);
    let grid = FrequencyGrid::new(start, step, n).map_err(|e| Error::Schema(e.to_string()))?;
    let tol = 1e-6 * step;
    if let Some(i) = freqs.iter().enumerate().position(|(i, &f)| (f - grid.point(i)).abs() > tol + 1e-15 * f.abs()) {
        return Err(Error::Schema(format!("non-uniform frequency grid at row {}", i + 1)));
    }
    let trace = SpectrumTrace::new(grid, values, unit, rbw).map_err(|e| Error::Schema(e.to_string()))?;
    Ok(TraceFile { trace, instrument, timestamp })
}

pub fn write_trace(trace: &SpectrumTrace, path: impl AsRef<Path>) -> Result<()> {
    write_trace_file(&TraceFile::from(trace.clone()), path)
}

pub fn write_trace_file(file: &TraceFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = format_trace(file)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn format_trace(file: &TraceFile) -> Result<String> {
    let t = &file.trace;
    if t.values.is_empty() || t.values.len() != t.grid.count() {
        return Err(Error::invalid("refusing to write an empty or inconsistent trace"));
    }
    let mut out = String::new();
    writeln!(out, "# unit={}", t.unit).unwrap();
    writeln!(out, "# rbw_hz={:e}", t.rbw_hz).unwrap();
    if let Some(i) = &file.instrument {
        writeln!(out, "# instrument={i}").unwrap();
    }
    if let Some(ts) = &file.timestamp {
        writeln!(out, "# timestamp={ts}").unwrap();
    }
    writeln!(out, "# grid_start_hz={:e}", t.grid.start()).unwrap();
    writeln!(out, "# grid_step_hz={:e}", t.grid.step()).unwrap();
    writeln!(out, "{HEADER}").unwrap();
    for (f, v) in t.grid.points().zip(&t.values) {
        writeln!(out, "{f:e},{v:e}").unwrap();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    /// File path, or `"synthetic"` for generated traces.
    pub source: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub input: InputDescriptor,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<LinewidthEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    /// Second estimate when two methods were run on the same trace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<LinewidthEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub config: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl AnalysisReport {
    pub fn new(input: InputDescriptor, method: impl Into<String>, config: Value) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: None,
            input,
            method: method.into(),
            result: None,
            fit: None,
            cross_check: None,
            error: None,
            config,
            seed: None,
        }
    }
}

/// Pretty JSON with every object's keys sorted.
pub fn format_report(report: &AnalysisReport) -> Result<String> {
    // serde_json's default map is ordered, so a round trip through Value sorts keys.
    let value = serde_json::to_value(report)?;
    let mut s = serde_json::to_string_pretty(&value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(report: &AnalysisReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if report.result.is_none() && report.fit.is_none() && report.error.is_none() {
        return Err(Error::invalid("report has no payload"));
    }
    let text = format_report(report)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<AnalysisReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: AnalysisReport = serde_json::from_str(&text)?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Schema(format!("unsupported report schema version {}", report.schema_version)));
    }
    Ok(report)
}
