//! Deterministic on-disk artifacts: training CSVs, the experiment-grid CSV,
//! the JSON summary, and the model checkpoint.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a CSV and re-emitting it reproduces the file byte-for-byte.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use qgat_core::models::ModelInstance;
use qgat_core::train::TrainReport;

use crate::config::ExperimentConfig;
use crate::{CliError, CliResult};

/// `report.csv`: one row per epoch. Wall-clock timing deliberately stays out
/// of the file so reruns with the same seed are byte-identical.
pub fn training_csv(report: &TrainReport) -> String {
    let mut out = String::from("epoch,loss,r2,lr\n");
    for row in &report.epochs {
        out.push_str(&format!("{},{},{},{}\n", row.epoch, row.loss, row.r2, row.lr));
    }
    out
}

/// Parses a CSV written by this module back into rows of floats (the header
/// is returned separately).
pub fn parse_csv(text: &str) -> anyhow::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| anyhow!("empty csv"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| cell.parse::<f64>().with_context(|| format!("row {}: bad cell {cell:?}", i + 2)))
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Re-emits a parsed CSV; used by the round-trip tests.
pub fn emit_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct SummaryDoc<'a> {
    kind: &'a str,
    aggregation: &'a str,
    max_atoms: usize,
    samples: usize,
    seed: u64,
    epochs: usize,
    final_loss: f64,
    final_r2: f64,
    param_count: usize,
    param_groups: Vec<(String, usize)>,
}

pub fn summary_json(cfg: &ExperimentConfig, model: &ModelInstance, report: &TrainReport) -> String {
    let count = model.count_params();
    let doc = SummaryDoc {
        kind: cfg.experiment.kind.as_str(),
        aggregation: cfg.experiment.aggregation.as_str(),
        max_atoms: cfg.experiment.max_atoms,
        samples: cfg.experiment.samples,
        seed: cfg.experiment.seed,
        epochs: report.epochs.len(),
        final_loss: report.final_loss(),
        final_r2: report.final_r2(),
        param_count: count.total,
        param_groups: count.groups,
    };
    serde_json::to_string_pretty(&doc).expect("summary serializes")
}

#[derive(Debug, Serialize)]
struct CheckpointSegment<'a> {
    name: &'a str,
    values: &'a [f64],
}

#[derive(Debug, Serialize)]
struct CheckpointDoc<'a> {
    config: &'a ExperimentConfig,
    segments: Vec<CheckpointSegment<'a>>,
}

/// `checkpoint.json`: the experiment config plus every named parameter
/// segment as a flat value list.
pub fn checkpoint_json(cfg: &ExperimentConfig, model: &ModelInstance) -> String {
    let segments = model
        .store
        .segments()
        .iter()
        .map(|seg| CheckpointSegment {
            name: &seg.name,
            values: &model.store.values()[seg.range()],
        })
        .collect();
    let doc = CheckpointDoc { config: cfg, segments };
    serde_json::to_string_pretty(&doc).expect("checkpoint serializes")
}

pub fn write(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::runtime(anyhow!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::runtime(anyhow!("cannot write {}: {e}", path.display())))
}
