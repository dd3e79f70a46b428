//! Loss, metrics, optimizer, learning-rate schedule, and the training loop.
//!
//! Training is full-batch over the sampled molecule set: every epoch runs the
//! node-level aggregation forward pass on each molecule, averages the Smooth
//! L1 loss over the batch, accumulates gradients in molecule order, and takes
//! one Adam step. With a fixed seed the whole procedure is bit-reproducible.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::graph::DatasetSplit;
use crate::models::{ModelError, ModelInstance};

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    EmptySplit,
    BadConfig(&'static str),
    ShapeMismatch { params: usize, grads: usize },
    /// Loss stopped being finite at this epoch.
    Diverged { epoch: usize },
    Model(ModelError),
    /// R² is undefined when targets are constant.
    ConstantTargets,
    TooFewSamples(usize),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptySplit => write!(f, "training split is empty"),
            TrainError::BadConfig(msg) => write!(f, "bad training config: {msg}"),
            TrainError::ShapeMismatch { params, grads } => {
                write!(f, "{grads} gradients for {params} parameters")
            }
            TrainError::Diverged { epoch } => write!(f, "loss diverged at epoch {epoch}"),
            TrainError::Model(e) => write!(f, "{e}"),
            TrainError::ConstantTargets => write!(f, "R² undefined: targets are constant"),
            TrainError::TooFewSamples(n) => write!(f, "R² needs at least 2 samples, got {n}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}

/// Smooth L1 loss with threshold 1: quadratic below unit error, linear above.
pub fn smooth_l1(pred: f64, target: f64) -> f64 {
    let d = (pred - target).abs();
    if d < 1.0 {
        0.5 * d * d
    } else {
        d - 0.5
    }
}

/// d smooth_l1 / d pred.
pub fn smooth_l1_deriv(pred: f64, target: f64) -> f64 {
    (pred - target).clamp(-1.0, 1.0)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2_score(preds: &[f64], targets: &[f64]) -> Result<f64, TrainError> {
    if preds.len() != targets.len() {
        return Err(TrainError::ShapeMismatch { params: targets.len(), grads: preds.len() });
    }
    if targets.len() < 2 {
        return Err(TrainError::TooFewSamples(targets.len()));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(TrainError::ConstantTargets);
    }
    let ss_res: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Adam configuration and schedule. The paper's optimizer settings are the
/// defaults: β1 = β2 = 0.9, learning rate 0.03 decaying multiplicatively.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr0: f64,
    /// Multiplicative per-epoch learning-rate factor.
    pub decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            lr0: 0.03,
            decay: 0.99,
            beta1: 0.9,
            beta2: 0.9,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::BadConfig("epochs must be >= 1"));
        }
        if !(self.lr0 > 0.0) {
            return Err(TrainError::BadConfig("lr0 must be > 0"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(TrainError::BadConfig("decay must be in (0, 1]"));
        }
        Ok(())
    }
}

/// First/second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl AdamState {
    pub fn new(num_params: usize) -> Self {
        AdamState { m: vec![0.0; num_params], v: vec![0.0; num_params], t: 0 }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    cfg: &TrainConfig,
    lr: f64,
) -> Result<(), TrainError> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(TrainError::ShapeMismatch { params: params.len(), grads: grads.len() });
    }
    state.t += 1;
    let bc1 = 1.0 - cfg.beta1.powi(state.t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(state.t as i32);
    for i in 0..params.len() {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

/// One epoch's metrics. `wall_ms` comes from the caller-supplied clock and is
/// zero under the default [`NullStopwatch`].
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub loss: f64,
    pub r2: f64,
    pub lr: f64,
    pub wall_ms: u64,
}

/// Full training record: one row per epoch plus the configuration echo.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRow>,
    pub param_count: usize,
    pub config: TrainConfig,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map_or(f64::NAN, |e| e.loss)
    }

    pub fn final_r2(&self) -> f64 {
        self.epochs.last().map_or(f64::NAN, |e| e.r2)
    }
}

/// Wall-clock hook for epoch timing. The core crate has no clock; callers
/// that want timing inject one.
pub trait Stopwatch {
    /// Milliseconds elapsed since the stopwatch was created.
    fn elapsed_ms(&mut self) -> u64;
}

/// Reports zero elapsed time.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullStopwatch;

impl Stopwatch for NullStopwatch {
    fn elapsed_ms(&mut self) -> u64 {
        0
    }
}

/// Full-batch gradient descent with Adam over the split. Each epoch records
/// the batch loss and training R² computed from the epoch's (pre-update)
/// predictions. R² is NaN when the split has constant targets or a single
/// molecule.
pub fn train(
    model: &mut ModelInstance,
    split: &DatasetSplit,
    cfg: &TrainConfig,
    clock: &mut dyn Stopwatch,
) -> Result<TrainReport, TrainError> {
    cfg.validate()?;
    if split.graphs.is_empty() {
        return Err(TrainError::EmptySplit);
    }
    let batch = split.graphs.len() as f64;
    let targets: Vec<f64> = split.targets();
    let mut state = AdamState::new(model.store.len());
    let mut lr = cfg.lr0;
    let mut rows = Vec::with_capacity(cfg.epochs);
    let mut grads = vec![0.0; model.store.len()];
    let mut last_ms = clock.elapsed_ms();
    for epoch in 0..cfg.epochs {
        grads.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        let mut preds = Vec::with_capacity(split.graphs.len());
        for (idx, graph) in split.graphs.iter().enumerate() {
            let (pred, dpred) = model.forward_backward(graph, idx)?;
            preds.push(pred);
            loss += smooth_l1(pred, targets[idx]) / batch;
            let scale = smooth_l1_deriv(pred, targets[idx]) / batch;
            for (g, d) in grads.iter_mut().zip(&dpred) {
                *g += scale * d;
            }
        }
        if !loss.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        let r2 = r2_score(&preds, &targets).unwrap_or(f64::NAN);
        adam_step(model.store.values_mut(), &grads, &mut state, cfg, lr)?;
        let now = clock.elapsed_ms();
        rows.push(EpochRow { epoch, loss, r2, lr, wall_ms: now - last_ms });
        last_ms = now;
        lr *= cfg.decay;
    }
    Ok(TrainReport { epochs: rows, param_count: model.store.len(), config: cfg.clone() })
}
