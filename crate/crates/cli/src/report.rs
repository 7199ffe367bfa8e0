//! Experiment report rows and their CSV / JSON serializations.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputPaths};
use crate::error::CliResult;

pub const CSV_HEADER: [&str; 9] = [
    "method",
    "budget",
    "f_m_mean",
    "f_m_stderr",
    "f_notm_mean",
    "f_notm_stderr",
    "bound_ratio",
    "wall_ms",
    "rng_seed",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub budget: usize,
    pub f_m_mean: f64,
    pub f_m_stderr: f64,
    pub f_notm_mean: f64,
    pub f_notm_stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_ratio: Option<f64>,
    pub wall_ms: u128,
    pub rng_seed: u64,
    /// Selected seed set in input-file ids (JSON report only).
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub estimator_mode: String,
    pub r_opt: usize,
    pub r_eval: usize,
    pub base_seed: u64,
    pub random_trials: usize,
    /// Replications used to evaluate each random-baseline draw
    /// (`r_eval / 10`, at least one).
    pub random_eval_replications: usize,
    /// Wall time spent in seed selection, per method.
    pub solve_ms: BTreeMap<String, u128>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: RunMetadata,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<ExperimentConfig>,
    pub rows: Vec<ReportRow>,
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Writes the fixed-column CSV; `bound_ratio` is empty for rows without one.
pub fn write_csv<W: Write>(report: &ExperimentReport, writer: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.method.clone(),
            r.budget.to_string(),
            fmt_f64(r.f_m_mean),
            fmt_f64(r.f_m_stderr),
            fmt_f64(r.f_notm_mean),
            fmt_f64(r.f_notm_stderr),
            r.bound_ratio.map(fmt_f64).unwrap_or_default(),
            r.wall_ms.to_string(),
            r.rng_seed.to_string(),
        ])?;
    }
    w.flush().map_err(std::io::Error::from)?;
    Ok(())
}

pub fn csv_string(report: &ExperimentReport) -> CliResult<String> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Drops the wall-time column, for byte-level determinism comparisons.
pub fn strip_wall_ms(csv_text: &str) -> String {
    let wall_index = CSV_HEADER.iter().position(|&h| h == "wall_ms").unwrap();
    csv_text
        .lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            fields
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != wall_index)
                .map(|(_, f)| *f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn write_json<W: Write>(report: &ExperimentReport, mut writer: W) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut writer, report)?;
    writer.write_all(b"\n").map_err(std::io::Error::from)?;
    Ok(())
}

/// Writes the report to the configured paths.
pub fn emit_report(report: &ExperimentReport, output: &OutputPaths) -> CliResult<()> {
    if let Some(path) = &output.csv {
        let file = std::fs::File::create(path)?;
        write_csv(report, file)?;
    }
    if let Some(path) = &output.json {
        let file = std::fs::File::create(path)?;
        write_json(report, file)?;
    }
    Ok(())
}

/// FNV-1a over a string, rendered as hex; used for the config hash.
pub fn fnv64_hex(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
