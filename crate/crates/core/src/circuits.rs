//! Circuit construction: attention-scaled Fourier feature maps, the
//! 15-parameter two-qubit W convolution cell, alternating convolution layers,
//! register-halving pooling, and the assembled QGCN ansatz.
//!
//! A [`CircuitSpec`] is an ordered gate list plus a slot table. Slots are
//! either *trainable* (the angle is a model parameter) or *feature-bound*
//! (the angle is an input feature, optionally multiplied by a trainable
//! scale). The builders here only lay out structure; angle binding happens in
//! `models`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::qsim::{self, Gate, Observable, QsimError, StateVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircuitError {
    /// Convolution layers need at least two live qubits.
    TooFewLiveQubits(usize),
    /// Convolution and pooling act on an even number of qubits.
    OddLiveCount(usize),
    /// A W cell was asked to act on one qubit twice.
    IdenticalPairQubits(usize),
    /// Register width is not `2^L ×` (final survivor count ≥ 1).
    IncompatibleDepths { num_qubits: usize, layers: usize },
    /// Zero convolution depth.
    ZeroDepth,
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::TooFewLiveQubits(n) => write!(f, "need at least 2 live qubits, have {n}"),
            CircuitError::OddLiveCount(n) => write!(f, "live qubit count {n} must be even"),
            CircuitError::IdenticalPairQubits(q) => write!(f, "pair addresses qubit {q} twice"),
            CircuitError::IncompatibleDepths { num_qubits, layers } => {
                write!(f, "{num_qubits} qubits cannot be halved {layers} times")
            }
            CircuitError::ZeroDepth => write!(f, "convolution depth must be >= 1"),
        }
    }
}

impl core::error::Error for CircuitError {}

/// What a parameter slot is bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotBinding {
    /// Angle comes from the trainable parameter at this index.
    Trainable(usize),
    /// Angle is input feature `index`, multiplied by trainable parameter
    /// `scale` when present (the attention-scaled feature map) and used as-is
    /// otherwise.
    Feature { index: usize, scale: Option<usize> },
}

/// Ordered gate sequence with named, bound parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub slot_names: Vec<String>,
    pub bindings: Vec<SlotBinding>,
}

impl CircuitSpec {
    pub fn num_slots(&self) -> usize {
        self.slot_names.len()
    }

    /// Runs the circuit with explicit per-slot angles.
    pub fn run(&self, slot_values: &[f64], init: &StateVector) -> Result<StateVector, QsimError> {
        self.check_len(slot_values)?;
        qsim::run(&self.gates, slot_values, init)
    }

    /// Expectation and per-slot gradient in one adjoint sweep.
    pub fn eval_with_gradient(
        &self,
        slot_values: &[f64],
        init: &StateVector,
        obs: &Observable,
        discarded: &[usize],
    ) -> Result<(f64, Vec<f64>), QsimError> {
        self.check_len(slot_values)?;
        qsim::eval_with_gradient(&self.gates, slot_values, init, obs, discarded)
    }

    /// `∂⟨O⟩/∂slot_k` for every slot.
    pub fn gradient(
        &self,
        slot_values: &[f64],
        init: &StateVector,
        obs: &Observable,
        discarded: &[usize],
    ) -> Result<Vec<f64>, QsimError> {
        self.eval_with_gradient(slot_values, init, obs, discarded).map(|(_, g)| g)
    }

    fn check_len(&self, slot_values: &[f64]) -> Result<(), QsimError> {
        if slot_values.len() != self.num_slots() {
            return Err(QsimError::ParamLengthMismatch {
                expected: self.num_slots(),
                got: slot_values.len(),
            });
        }
        Ok(())
    }

    /// Stable textual dump, one gate per line: kind, targets, slot names.
    /// Golden-file tests pin this format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            let _ = write!(out, "{}", gate.kind.name());
            for &t in &gate.targets {
                let _ = write!(out, " {t}");
            }
            for &s in &gate.slots {
                let _ = write!(out, " {}", self.slot_names[s]);
            }
            out.push('\n');
        }
        out
    }
}

/// Incrementally assembles a [`CircuitSpec`], allocating slot ids and
/// trainable parameter indices as gates are appended.
#[derive(Debug)]
pub struct CircuitBuilder {
    num_qubits: usize,
    gates: Vec<Gate>,
    slot_names: Vec<String>,
    bindings: Vec<SlotBinding>,
    next_trainable: usize,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize) -> Self {
        CircuitBuilder {
            num_qubits,
            gates: Vec::new(),
            slot_names: Vec::new(),
            bindings: Vec::new(),
            next_trainable: 0,
        }
    }

    /// Starts trainable parameter numbering at `base` instead of 0.
    pub fn with_trainable_base(num_qubits: usize, base: usize) -> Self {
        let mut b = Self::new(num_qubits);
        b.next_trainable = base;
        b
    }

    pub fn num_trainable(&self) -> usize {
        self.next_trainable
    }

    fn fresh_trainable_slot(&mut self, name: String) -> usize {
        let slot = self.slot_names.len();
        self.slot_names.push(name);
        self.bindings.push(SlotBinding::Trainable(self.next_trainable));
        self.next_trainable += 1;
        slot
    }

    fn slot_with_binding(&mut self, name: String, binding: SlotBinding) -> usize {
        let slot = self.slot_names.len();
        self.slot_names.push(name);
        self.bindings.push(binding);
        slot
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn finish(self) -> CircuitSpec {
        CircuitSpec {
            num_qubits: self.num_qubits,
            gates: self.gates,
            slot_names: self.slot_names,
            bindings: self.bindings,
        }
    }
}

/// Feature map layout: one RX rotation per qubit at depth 1, with angle
/// `scale_i · x_i` in trainable mode and `x_i` in plain mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureMapSpec {
    pub num_qubits: usize,
    pub trainable_scales: bool,
}

/// One RX per qubit; in trainable mode every qubit gets its own scale
/// parameter (the per-qubit attention/frequency weight).
pub fn build_feature_map(num_qubits: usize, trainable_scales: bool) -> FeatureMapSpec {
    FeatureMapSpec { num_qubits, trainable_scales }
}

impl FeatureMapSpec {
    /// Appends the encoding rotations. `scale_base` is the trainable index of
    /// the first per-qubit scale (scales occupy `scale_base..scale_base+n`).
    fn emit(&self, b: &mut CircuitBuilder, scale_base: Option<usize>) {
        for q in 0..self.num_qubits {
            let scale = scale_base.map(|base| base + q);
            let slot = b.slot_with_binding(
                format!("fm{q}"),
                SlotBinding::Feature { index: q, scale },
            );
            b.push(Gate::rx(q, slot));
        }
    }
}

/// Nearest-neighbor pair set `S(j) = {(i, i+1) | i ≡ j (mod 2), i ≤ n-2}`
/// over live-qubit *positions*: even steps pair (0,1),(2,3),…; odd steps
/// pair (1,2),(3,4),…
pub fn conv_pairs(n_live: usize, step: usize) -> Result<Vec<(usize, usize)>, CircuitError> {
    if n_live < 2 {
        return Err(CircuitError::TooFewLiveQubits(n_live));
    }
    Ok(((step % 2)..=(n_live - 2)).step_by(2).map(|i| (i, i + 1)).collect())
}

/// Appends one W convolution cell on a qubit pair: 4 general RG rotations,
/// 3 single-qubit rotations, and 3 CZ gates, 15 fresh trainable slots in all.
pub fn build_w_cell(b: &mut CircuitBuilder, cell: usize, pair: (usize, usize)) -> Result<(), CircuitError> {
    let (lo, hi) = pair;
    if lo == hi {
        return Err(CircuitError::IdenticalPairQubits(lo));
    }
    let rg = |b: &mut CircuitBuilder, idx: usize, qubit: usize| {
        let s1 = b.fresh_trainable_slot(format!("w{cell}.rg{idx}.t1"));
        let s2 = b.fresh_trainable_slot(format!("w{cell}.rg{idx}.t2"));
        let s3 = b.fresh_trainable_slot(format!("w{cell}.rg{idx}.t3"));
        b.push(Gate::rg(qubit, [s1, s2, s3]));
    };
    rg(b, 0, lo);
    rg(b, 1, hi);
    b.push(Gate::cz(lo, hi));
    let rz = b.fresh_trainable_slot(format!("w{cell}.rz"));
    b.push(Gate::rz(lo, rz));
    let ry0 = b.fresh_trainable_slot(format!("w{cell}.ry0"));
    b.push(Gate::ry(hi, ry0));
    b.push(Gate::cz(lo, hi));
    let ry1 = b.fresh_trainable_slot(format!("w{cell}.ry1"));
    b.push(Gate::ry(hi, ry1));
    b.push(Gate::cz(lo, hi));
    rg(b, 2, lo);
    rg(b, 3, hi);
    Ok(())
}

/// Slots consumed by one W cell.
pub const W_CELL_SLOTS: usize = 15;

/// Appends a full convolution layer of depth `r` over the live qubits:
/// step `j` places a W cell on every pair of `conv_pairs(|live|, j)`, each
/// cell with its own fresh parameters. `cell_counter` numbers cells across
/// the whole circuit so slot names stay unique.
pub fn build_conv_layer(
    b: &mut CircuitBuilder,
    live: &[usize],
    depth: usize,
    cell_counter: &mut usize,
) -> Result<(), CircuitError> {
    if depth == 0 {
        return Err(CircuitError::ZeroDepth);
    }
    if live.len() % 2 != 0 {
        return Err(CircuitError::OddLiveCount(live.len()));
    }
    for step in 0..depth {
        for (i, j) in conv_pairs(live.len(), step)? {
            build_w_cell(b, *cell_counter, (live[i], live[j]))?;
            *cell_counter += 1;
        }
    }
    Ok(())
}

/// Number of W cells a conv layer of the given width and depth emits.
pub fn conv_layer_cells(n_live: usize, depth: usize) -> Result<usize, CircuitError> {
    let mut cells = 0;
    for step in 0..depth {
        cells += conv_pairs(n_live, step)?.len();
    }
    Ok(cells)
}

/// Controlled gate applied from each discarded qubit before discard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolGate {
    /// CX from the discarded qubit onto its surviving right neighbor.
    #[default]
    Cx,
    /// CZ between the discarded qubit and its surviving right neighbor.
    Cz,
    /// Plain trace-out with no controlled operation.
    None,
}

/// One pooling step: which qubits get discarded and the controlled pairs
/// (discarded → survivor) emitted before the deferred discard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolLayer {
    pub discarded: Vec<usize>,
    pub survivors: Vec<usize>,
    pub controlled_pairs: Vec<(usize, usize)>,
}

/// Per-layer pooling schedule for a full circuit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PoolPlan {
    pub gate: PoolGate,
    pub layers: Vec<PoolLayer>,
}

/// Pools the live register: positions ≡ 0 (mod 2) are discarded, survivors
/// keep their relative order, and each discarded qubit controls one gate on
/// its surviving right neighbor.
pub fn build_pool_layer(live: &[usize]) -> Result<PoolLayer, CircuitError> {
    if live.len() % 2 != 0 {
        return Err(CircuitError::OddLiveCount(live.len()));
    }
    let mut discarded = Vec::with_capacity(live.len() / 2);
    let mut survivors = Vec::with_capacity(live.len() / 2);
    let mut controlled_pairs = Vec::with_capacity(live.len() / 2);
    for pos in (0..live.len()).step_by(2) {
        discarded.push(live[pos]);
        survivors.push(live[pos + 1]);
        controlled_pairs.push((live[pos], live[pos + 1]));
    }
    Ok(PoolLayer { discarded, survivors, controlled_pairs })
}

/// Configuration of the full QGCN circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QgcnConfig {
    pub num_qubits: usize,
    /// Convolution depth r per layer; the length fixes the layer count L.
    pub depths: Vec<usize>,
    /// Per-qubit trainable feature-map scales (the trainable Fourier map).
    pub trainable_scales: bool,
    /// Trainable observable weights ω on the surviving qubits.
    pub trainable_omega: bool,
    pub pool_gate: PoolGate,
    /// Share one 15-slot parameter set across all W cells of a layer instead
    /// of giving every cell fresh parameters.
    pub share_layer_params: bool,
}

impl QgcnConfig {
    pub fn new(num_qubits: usize, depths: Vec<usize>) -> Self {
        QgcnConfig {
            num_qubits,
            depths,
            trainable_scales: false,
            trainable_omega: false,
            pool_gate: PoolGate::Cx,
            share_layer_params: false,
        }
    }
}

/// The assembled circuit: feature map followed by alternating convolution and
/// pooling layers, plus everything needed to evaluate it as a model.
///
/// Trainable parameter layout: `[0, num_circuit_params)` are the W-cell
/// angles in emission order, followed by the feature-map scales when enabled,
/// followed by the observable weights when trainable.
#[derive(Debug, Clone, PartialEq)]
pub struct QgcnModel {
    pub spec: CircuitSpec,
    pub pool_plan: PoolPlan,
    pub survivors: Vec<usize>,
    pub discarded: Vec<usize>,
    pub num_circuit_params: usize,
    pub num_scales: usize,
    pub num_omega: usize,
    /// Gate-stream prefix lengths: after the feature map, then after each
    /// conv+pool layer. Lets the density-matrix oracle replay the circuit
    /// layer by layer, tracing after each pool.
    pub gate_layer_bounds: Vec<usize>,
}

impl QgcnModel {
    pub fn num_params(&self) -> usize {
        self.num_circuit_params + self.num_scales + self.num_omega
    }

    /// Trainable index range of the feature-map scales, when present.
    pub fn scale_range(&self) -> Option<core::ops::Range<usize>> {
        if self.num_scales == 0 {
            None
        } else {
            Some(self.num_circuit_params..self.num_circuit_params + self.num_scales)
        }
    }

    /// Trainable index range of the observable weights, when present.
    pub fn omega_range(&self) -> Option<core::ops::Range<usize>> {
        if self.num_omega == 0 {
            None
        } else {
            let start = self.num_circuit_params + self.num_scales;
            Some(start..start + self.num_omega)
        }
    }

    /// Measurement observable over the final survivors. `theta` is the full
    /// trainable vector; weights are read from it when ω is trainable and
    /// fixed to 1 otherwise.
    pub fn observable(&self, theta: &[f64]) -> Result<Observable, QsimError> {
        let terms = match self.omega_range() {
            Some(range) => self
                .survivors
                .iter()
                .zip(&theta[range])
                .map(|(&q, &w)| (q, w))
                .collect(),
            None => self.survivors.iter().map(|&q| (q, 1.0)).collect(),
        };
        Observable::new(terms, self.survivors.len())
    }
}

/// Builds the full QGCN: feature map, then `C_l ∘ P_l` alternating for every
/// entry of `depths`, halving the live register each pooling step.
pub fn build_qgcn(cfg: &QgcnConfig) -> Result<QgcnModel, CircuitError> {
    let layers = cfg.depths.len();
    // Width must halve cleanly L times with at least one survivor.
    if layers == 0
        || cfg.num_qubits == 0
        || cfg.num_qubits % (1 << layers) != 0
        || cfg.num_qubits >> layers == 0
    {
        return Err(CircuitError::IncompatibleDepths { num_qubits: cfg.num_qubits, layers });
    }
    for &r in &cfg.depths {
        if r == 0 {
            return Err(CircuitError::ZeroDepth);
        }
    }

    // Cell angles occupy trainable indices [0, C); count C up front so the
    // feature-map scales can be laid out contiguously after them even though
    // the encoding gates are emitted first.
    let mut total_cells = 0usize;
    let mut width = cfg.num_qubits;
    for &r in &cfg.depths {
        total_cells += conv_layer_cells(width, r)?;
        width /= 2;
    }
    let num_circuit_params = if cfg.share_layer_params {
        W_CELL_SLOTS * layers
    } else {
        W_CELL_SLOTS * total_cells
    };

    let mut b = CircuitBuilder::new(cfg.num_qubits);
    let scale_base = cfg.trainable_scales.then_some(num_circuit_params);
    build_feature_map(cfg.num_qubits, cfg.trainable_scales).emit(&mut b, scale_base);
    let mut gate_layer_bounds = alloc::vec![b.num_gates()];

    let mut live: Vec<usize> = (0..cfg.num_qubits).collect();
    let mut pool_plan = PoolPlan { gate: cfg.pool_gate, layers: Vec::with_capacity(layers) };
    let mut discarded = Vec::new();
    let mut cell_counter = 0usize;
    for (l, &r) in cfg.depths.iter().enumerate() {
        if cfg.share_layer_params {
            build_shared_conv_layer(&mut b, &live, r, l)?;
        } else {
            build_conv_layer(&mut b, &live, r, &mut cell_counter)?;
        }
        let pool = build_pool_layer(&live)?;
        for &(c, t) in &pool.controlled_pairs {
            match cfg.pool_gate {
                PoolGate::Cx => b.push(Gate::cx(c, t)),
                PoolGate::Cz => b.push(Gate::cz(c, t)),
                PoolGate::None => {}
            }
        }
        gate_layer_bounds.push(b.num_gates());
        discarded.extend_from_slice(&pool.discarded);
        live = pool.survivors.clone();
        pool_plan.layers.push(pool);
    }
    discarded.sort_unstable();

    debug_assert_eq!(b.num_trainable(), num_circuit_params);
    let num_scales = if cfg.trainable_scales { cfg.num_qubits } else { 0 };
    let num_omega = if cfg.trainable_omega { live.len() } else { 0 };
    Ok(QgcnModel {
        spec: b.finish(),
        pool_plan,
        survivors: live,
        discarded,
        num_circuit_params,
        num_scales,
        num_omega,
        gate_layer_bounds,
    })
}

/// Conv layer variant where every W cell in layer `l` reads the same 15
/// trainable angles (the literal single-θ^l reading of the layer map).
fn build_shared_conv_layer(
    b: &mut CircuitBuilder,
    live: &[usize],
    depth: usize,
    layer: usize,
) -> Result<(), CircuitError> {
    if depth == 0 {
        return Err(CircuitError::ZeroDepth);
    }
    if live.len() % 2 != 0 {
        return Err(CircuitError::OddLiveCount(live.len()));
    }
    // One shared slot set for the whole layer; every cell's gates reference it.
    let mut slots = [0usize; W_CELL_SLOTS];
    let names = [
        "rg0.t1", "rg0.t2", "rg0.t3", "rg1.t1", "rg1.t2", "rg1.t3", "rz", "ry0", "ry1", "rg2.t1",
        "rg2.t2", "rg2.t3", "rg3.t1", "rg3.t2", "rg3.t3",
    ];
    for (k, name) in names.iter().enumerate() {
        slots[k] = b.fresh_trainable_slot(format!("l{layer}.{name}"));
    }
    for step in 0..depth {
        for (i, j) in conv_pairs(live.len(), step)? {
            let (lo, hi) = (live[i], live[j]);
            b.push(Gate::rg(lo, [slots[0], slots[1], slots[2]]));
            b.push(Gate::rg(hi, [slots[3], slots[4], slots[5]]));
            b.push(Gate::cz(lo, hi));
            b.push(Gate::rz(lo, slots[6]));
            b.push(Gate::ry(hi, slots[7]));
            b.push(Gate::cz(lo, hi));
            b.push(Gate::ry(hi, slots[8]));
            b.push(Gate::cz(lo, hi));
            b.push(Gate::rg(lo, [slots[9], slots[10], slots[11]]));
            b.push(Gate::rg(hi, [slots[12], slots[13], slots[14]]));
        }
    }
    Ok(())
}
