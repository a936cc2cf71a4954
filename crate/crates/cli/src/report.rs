//! Versioned run reports and their JSON and CSV renderings.

use std::fmt::Write as _;

use cryamabe::heisenberg_geometry::ModelConvention;
use cryamabe::{Error, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// How a check compares `value` with `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value − target| ≤ tolerance · |target|`.
    Relative,
    /// `|value − target| ≤ tolerance`.
    Absolute,
    /// `value ≥ target − tolerance`.
    AtLeast,
    /// `value ≤ target + tolerance`.
    AtMost,
    /// `value > target`.
    Exceeds,
}

/// One named pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub comparison: Comparison,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, comparison: Comparison, value: f64, target: f64, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::Relative => (value - target).abs() <= tolerance * target.abs(),
            Comparison::Absolute => (value - target).abs() <= tolerance,
            Comparison::AtLeast => value >= target - tolerance,
            Comparison::AtMost => value <= target + tolerance,
            Comparison::Exceeds => value > target,
        };
        Self { name: name.into(), comparison, value, target, tolerance, passed }
    }
}

/// Output of a subcommand before it is wrapped into a [`RunReport`].
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    /// Per-point rows for CSV output; the checks table is used when empty.
    pub table: Option<Table>,
}

/// Column-oriented data for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub convention: ModelConvention,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: Value,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn new(config: RunConfig, convention: ModelConvention, outcome: &Outcome, wall_time_seconds: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION"),
            command: config.command.clone(),
            passed: outcome.checks.iter().all(|c| c.passed),
            checks: outcome.checks.clone(),
            results: outcome.results.clone(),
            config,
            convention,
            wall_time_seconds,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Validation(format!("cannot serialize report: {e}")))
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn csv_line(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let line: Vec<String> = cells.into_iter().map(|c| csv_field(&c)).collect();
    let _ = writeln!(out, "{}", line.join(","));
}

/// CSV rendering: the per-point table when present, otherwise the checks.
pub fn to_csv(report: &RunReport, outcome: &Outcome) -> String {
    let mut out = String::new();
    match &outcome.table {
        Some(table) => {
            csv_line(&mut out, table.header.iter().cloned());
            for row in &table.rows {
                csv_line(&mut out, row.iter().cloned());
            }
        }
        None => {
            csv_line(&mut out, ["name", "comparison", "value", "target", "tolerance", "passed"].map(String::from));
            for check in &report.checks {
                let comparison = serde_json::to_value(check.comparison)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default();
                csv_line(
                    &mut out,
                    [
                        check.name.clone(),
                        comparison,
                        format!("{:e}", check.value),
                        format!("{:e}", check.target),
                        format!("{:e}", check.tolerance),
                        check.passed.to_string(),
                    ],
                );
            }
        }
    }
    out
}
