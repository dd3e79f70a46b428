//! TOML experiment configuration for `qgat train`.
//!
//! ```toml
//! [experiment]
//! kind = "qgat"            # gnn | gat | qgnn | qgat
//! aggregation = "single"   # single | multi
//! max_atoms = 9
//! samples = 10
//! seed = 7
//! dataset = "data/qm9_sample.jsonl"
//! out_dir = "out/qgat-single-9"
//! # attention = "free"     # optional override: none | free | softmax | feature_based
//!
//! [quantum]                # required for qgnn/qgat
//! depths = [3, 1, 1]
//! # pool_gate = "cx"       # cx | cz | none
//! # share_layer_params = false
//! # trainable_omega = false
//!
//! [classical]              # required for gnn/gat
//! hidden = [8]
//!
//! [train]
//! epochs = 150
//! lr0 = 0.03
//! decay = 0.99
//! ```
//!
//! The model kind fixes the defaults: `gat`/`qgat` use free per-edge
//! attention and (for `qgat`) the trainable feature map; `gnn`/`qgnn` use
//! uniform weights and the plain Fourier map.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use qgat_core::circuits::{PoolGate, QgcnConfig};
use qgat_core::models::{AggregationMode, AttentionMode, ModelConfig, ModelKindConfig};
use qgat_core::train::TrainConfig;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKindName {
    Gnn,
    Gat,
    Qgnn,
    Qgat,
}

impl ModelKindName {
    pub fn is_quantum(self) -> bool {
        matches!(self, ModelKindName::Qgnn | ModelKindName::Qgat)
    }

    pub fn uses_attention(self) -> bool {
        matches!(self, ModelKindName::Gat | ModelKindName::Qgat)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKindName::Gnn => "gnn",
            ModelKindName::Gat => "gat",
            ModelKindName::Qgnn => "qgnn",
            ModelKindName::Qgat => "qgat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationName {
    Single,
    Multi,
}

impl AggregationName {
    pub fn as_str(self) -> &'static str {
        match self {
            AggregationName::Single => "single",
            AggregationName::Multi => "multi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionName {
    None,
    Free,
    Softmax,
    FeatureBased,
}

impl From<AttentionName> for AttentionMode {
    fn from(a: AttentionName) -> Self {
        match a {
            AttentionName::None => AttentionMode::None,
            AttentionName::Free => AttentionMode::Free,
            AttentionName::Softmax => AttentionMode::Softmax,
            AttentionName::FeatureBased => AttentionMode::FeatureBased,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ModelKindName,
    pub aggregation: AggregationName,
    pub max_atoms: usize,
    pub samples: usize,
    pub seed: u64,
    pub dataset: PathBuf,
    pub out_dir: PathBuf,
    pub attention: Option<AttentionName>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSection {
    pub depths: Vec<usize>,
    #[serde(default)]
    pub pool_gate: Option<String>,
    #[serde(default)]
    pub share_layer_params: bool,
    #[serde(default)]
    pub trainable_omega: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    pub hidden: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    #[serde(default = "default_lr0")]
    pub lr0: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
}

fn default_lr0() -> f64 {
    0.03
}

fn default_decay() -> f64 {
    0.99
}

/// Full experiment description as read from disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub quantum: Option<QuantumSection>,
    pub classical: Option<ClassicalSection>,
    pub train: TrainSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::user(anyhow!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("{}: invalid config", path.display()))
            .map_err(CliError::User)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Combination validity: quantum kinds need circuit depths, classical
    /// kinds need hidden widths.
    pub fn validate(&self) -> CliResult<()> {
        let kind = self.experiment.kind;
        if kind.is_quantum() && self.quantum.is_none() {
            return Err(CliError::user(anyhow!(
                "kind {:?} needs a [quantum] section with circuit depths",
                kind.as_str()
            )));
        }
        if !kind.is_quantum() && self.classical.is_none() {
            return Err(CliError::user(anyhow!(
                "kind {:?} needs a [classical] section with hidden widths",
                kind.as_str()
            )));
        }
        if self.experiment.samples == 0 {
            return Err(CliError::user(anyhow!("samples must be >= 1")));
        }
        if self.train.epochs == 0 {
            return Err(CliError::user(anyhow!("epochs must be >= 1")));
        }
        Ok(())
    }

    pub fn attention_mode(&self) -> AttentionMode {
        match self.experiment.attention {
            Some(a) => a.into(),
            None if self.experiment.kind.uses_attention() => AttentionMode::Free,
            None => AttentionMode::None,
        }
    }

    /// Core model configuration implied by this experiment.
    pub fn model_config(&self) -> CliResult<ModelConfig> {
        let kind = match self.experiment.kind {
            ModelKindName::Gnn | ModelKindName::Gat => ModelKindConfig::Classical {
                hidden: self.classical.as_ref().expect("validated").hidden.clone(),
            },
            ModelKindName::Qgnn | ModelKindName::Qgat => {
                let q = self.quantum.as_ref().expect("validated");
                let mut qc = QgcnConfig::new(8, q.depths.clone());
                qc.trainable_scales = self.experiment.kind == ModelKindName::Qgat;
                qc.trainable_omega = q.trainable_omega;
                qc.share_layer_params = q.share_layer_params;
                qc.pool_gate = match q.pool_gate.as_deref() {
                    None | Some("cx") => PoolGate::Cx,
                    Some("cz") => PoolGate::Cz,
                    Some("none") => PoolGate::None,
                    Some(other) => {
                        return Err(CliError::user(anyhow!("unknown pool_gate {other:?}")))
                    }
                };
                ModelKindConfig::Quantum(qc)
            }
        };
        Ok(ModelConfig {
            kind,
            aggregation: match self.experiment.aggregation {
                AggregationName::Single => AggregationMode::Single,
                AggregationName::Multi => AggregationMode::Multi,
            },
            attention: self.attention_mode(),
            seed: self.experiment.seed,
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            lr0: self.train.lr0,
            decay: self.train.decay,
            seed: self.experiment.seed,
            ..TrainConfig::default()
        }
    }
}
