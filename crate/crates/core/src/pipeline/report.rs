use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row per deployment scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentReport {
    pub scheme: String,
    pub accuracy: f64,
    /// Fairness score, the estimated error rate `p`.
    pub fairness: f64,
    pub reward: f64,
    pub alpha: f64,
    pub beta: f64,
    pub cnots: usize,
    pub depth: usize,
    pub space_size: u128,
    /// Seconds; kept out of the CSV so reruns stay byte-identical.
    pub wall_time_s: f64,
    pub config_hash: String,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "scheme",
    "accuracy",
    "fairness",
    "reward",
    "alpha",
    "beta",
    "cnots",
    "depth",
    "space_size",
    "config_hash",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown report format {s:?}"))),
        }
    }
}

pub fn reports_to_csv(reports: &[DeploymentReport]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in reports {
        let row = [
            r.scheme.clone(),
            format!("{:.6}", r.accuracy),
            format!("{:.6}", r.fairness),
            format!("{:.6}", r.reward),
            format!("{:.6}", r.alpha),
            format!("{:.6}", r.beta),
            r.cnots.to_string(),
            r.depth.to_string(),
            r.space_size.to_string(),
            r.config_hash.clone(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn reports_to_json(reports: &[DeploymentReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::invalid(e.to_string()))
}

pub fn emit_report(reports: &[DeploymentReport], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Csv => reports_to_csv(reports),
        ReportFormat::Json => reports_to_json(reports)?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json_reports(path: impl AsRef<Path>) -> Result<Vec<DeploymentReport>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Fixed-width table for terminals.
pub fn format_table(reports: &[DeploymentReport]) -> String {
    let mut out = format!(
        "{:<8} {:>9} {:>9} {:>9} {:>6} {:>6} {:>14} {:>9}\n",
        "scheme", "accuracy", "fairness", "reward", "cnots", "depth", "space", "time[s]"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<8} {:>9.4} {:>9.4} {:>9.4} {:>6} {:>6} {:>14} {:>9.2}\n",
            r.scheme, r.accuracy, r.fairness, r.reward, r.cnots, r.depth, r.space_size, r.wall_time_s
        ));
    }
    out
}
