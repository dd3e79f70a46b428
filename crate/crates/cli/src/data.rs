//! JSONL dataset ingestion.
//!
//! One JSON object per line:
//!
//! ```json
//! {"id": "qm9_000017", "features": [[6,0,3,0,0,4,0,0,0,0,0.12011], ...],
//!  "edges": [[0,1],[1,2]], "target": -0.2231}
//! ```
//!
//! `features` is a row-major matrix, one row per atom, either 11 columns
//! (raw; columns 0–5 and 10 are kept) or 7 columns (already selected).
//! `edges` is an undirected pair list; either orientation may appear.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Deserialize;

use qgat_core::graph::{select_feature_columns, MolecularGraph, NUM_FEATURES, RAW_FEATURE_WIDTH};

use crate::{CliError, CliResult};

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    features: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
    target: f64,
}

/// Parses one JSONL document. Malformed input is rejected with the offending
/// line number.
pub fn parse_dataset(text: &str) -> anyhow::Result<Vec<MolecularGraph>> {
    let mut graphs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line)
            .with_context(|| format!("line {lineno}: malformed record"))?;
        let mut rows = Vec::with_capacity(raw.features.len());
        for row in &raw.features {
            let selected = match row.len() {
                NUM_FEATURES => {
                    let mut out = [0.0; NUM_FEATURES];
                    out.copy_from_slice(row);
                    out
                }
                RAW_FEATURE_WIDTH => select_feature_columns(row)
                    .map_err(|e| anyhow!("line {lineno}: {e}"))?,
                other => {
                    return Err(anyhow!(
                        "line {lineno}: feature row has width {other}, expected {NUM_FEATURES} or {RAW_FEATURE_WIDTH}"
                    ))
                }
            };
            rows.push(selected);
        }
        let edges: Vec<(usize, usize)> = raw.edges.iter().map(|&[u, v]| (u, v)).collect();
        let graph = MolecularGraph::new(raw.id, rows, &edges, raw.target)
            .map_err(|e| anyhow!("line {lineno}: {e}"))?;
        graphs.push(graph);
    }
    if graphs.is_empty() {
        return Err(anyhow!("dataset contains no records"));
    }
    Ok(graphs)
}

/// Reads and parses a JSONL dataset file.
pub fn load_dataset(path: &Path) -> CliResult<Vec<MolecularGraph>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::user(anyhow!("cannot read dataset {}: {e}", path.display())))?;
    parse_dataset(&text).map_err(CliError::User)
}

/// Validation summary printed by `validate-data`.
#[derive(Debug)]
pub struct ValidationReport {
    pub count: usize,
    pub max_atoms: usize,
    pub size_histogram: BTreeMap<usize, usize>,
    pub feature_min: [f64; NUM_FEATURES],
    pub feature_max: [f64; NUM_FEATURES],
}

pub fn validate(graphs: &[MolecularGraph]) -> ValidationReport {
    let mut report = ValidationReport {
        count: graphs.len(),
        max_atoms: 0,
        size_histogram: BTreeMap::new(),
        feature_min: [f64::INFINITY; NUM_FEATURES],
        feature_max: [f64::NEG_INFINITY; NUM_FEATURES],
    };
    for g in graphs {
        let n = g.atom_count();
        report.max_atoms = report.max_atoms.max(n);
        *report.size_histogram.entry(n).or_insert(0) += 1;
        for v in 0..n {
            for (k, &x) in g.feature_row(v).iter().enumerate() {
                report.feature_min[k] = report.feature_min[k].min(x);
                report.feature_max[k] = report.feature_max[k].max(x);
            }
        }
    }
    report
}

impl ValidationReport {
    pub fn print(&self) {
        println!("graphs: {}", self.count);
        println!("largest molecule: {} atoms", self.max_atoms);
        println!("size histogram:");
        for (size, count) in &self.size_histogram {
            println!("  {size:>3} atoms: {count}");
        }
        println!("feature ranges (selected columns):");
        const NAMES: [&str; NUM_FEATURES] = [
            "atomic number",
            "chirality",
            "degree",
            "formal charge",
            "radical electrons",
            "hybridization",
            "scaled mass",
        ];
        for (k, name) in NAMES.iter().enumerate() {
            println!("  {name:<18} [{}, {}]", self.feature_min[k], self.feature_max[k]);
        }
    }
}
