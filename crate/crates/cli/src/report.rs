use std::io::Write;
use std::path::Path;

use dshi_core::io::{format_report, AnalysisReport};

use crate::config::{CliResult, Failure};

/// Prints a report to stdout.
pub fn emit(report: &AnalysisReport) -> CliResult<()> {
    let text = format_report(report)?;
    std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}")))
}

/// Writes `columns`-headed CSV rows in the trace number format.
pub fn write_columns(path: &Path, columns: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> CliResult<()> {
    let mut text = columns.join(",");
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}
