//! Files written by an experiment run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::runners::{ExperimentResult, SummaryRow};
use crate::data::{write_csv, FeatureSchema};
use crate::error::{Error, Result};
use crate::federation::RoundLog;
use crate::metrics::MetricReport;
use crate::nn::checkpoint;

pub const ROUNDS_HEADER: &str = "round,loss,accuracy,kappa,kappa_pct,roc_auc,participants";

#[derive(Debug, Serialize)]
struct GeneratedFile {
    name: String,
    path: String,
    samples: usize,
    positives: usize,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    experiment: &'static str,
    seed: u64,
    rows: &'a [SummaryRow],
    #[serde(skip_serializing_if = "<[SummaryRow]>::is_empty")]
    in_distribution: &'a [SummaryRow],
    #[serde(rename = "final")]
    final_report: Option<&'a MetricReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    generated: Vec<GeneratedFile>,
    wall_clock_seconds: f64,
}

/// One CSV line per round. Floats use the shortest round-trip form, so the
/// file is byte-identical whenever the logs are.
pub fn rounds_csv(logs: &[RoundLog]) -> String {
    let mut out = String::from(ROUNDS_HEADER);
    out.push('\n');
    for log in logs {
        let m = &log.metrics;
        let participants: Vec<String> = log.participants.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            log.round,
            m.mean_loss,
            m.accuracy_pct,
            m.kappa,
            m.kappa * 100.0,
            m.roc_auc,
            participants.join(";")
        )
        .expect("write to string");
    }
    out
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `config.resolved.json`, `summary.json`, `rounds.csv` (when the run
/// has rounds), `.fwv` checkpoints, `partitions.json` and generated CSVs.
/// Returns the paths written.
pub fn emit_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
    wall_clock_seconds: f64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("config.resolved.json");
    write(&path, cfg.to_json())?;
    written.push(path);

    if !result.round_logs.is_empty() {
        let path = dir.join("rounds.csv");
        write(&path, rounds_csv(&result.round_logs))?;
        written.push(path);
    }

    for (name, weights) in &result.checkpoints {
        let path = dir.join(format!("model_{}.fwv", file_safe(name)));
        checkpoint::write(&path, weights)?;
        written.push(path);
    }

    if !result.partitions.is_empty() {
        let plans: Vec<serde_json::Value> = result
            .partitions
            .iter()
            .map(|p| serde_json::from_str(&p.to_json()).expect("plan json"))
            .collect();
        let path = dir.join("partitions.json");
        write(
            &path,
            serde_json::to_string_pretty(&plans).expect("plans serialize"),
        )?;
        written.push(path);
    }

    let mut generated = Vec::new();
    for d in &result.generated {
        let path = dir.join(format!("{}.csv", file_safe(&d.name)));
        write_csv(&path, d, &FeatureSchema::default())?;
        generated.push(GeneratedFile {
            name: d.name.clone(),
            path: path.display().to_string(),
            samples: d.len(),
            positives: d.class_counts().1,
        });
        written.push(path);
    }

    let summary = Summary {
        experiment: result.experiment.as_str(),
        seed: cfg.seed,
        rows: &result.table.rows,
        in_distribution: &result.in_distribution.rows,
        final_report: result.final_report.as_ref(),
        generated,
        wall_clock_seconds,
    };
    let path = dir.join("summary.json");
    write(
        &path,
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    written.push(path);
    Ok(written)
}
