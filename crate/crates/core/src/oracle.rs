//! Independent brute-force references for the test suites: dense circuit
//! matrices built from series matrix exponentials, density matrices with
//! explicit partial traces, the layer-by-layer pooling pipeline, the
//! product-state equivalence check, and finite-difference gradients.
//!
//! Everything here is deliberately naive — O(4^n) matrices, term-by-term
//! exponentials — and capped at a handful of qubits. Clarity over speed;
//! nothing in this module is a production path.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::Float;

use crate::circuits::QgcnModel;
use crate::qsim::{Gate, GateKind, Observable, QsimError, StateVector};

/// Dense matrices above this width are refused.
pub const MAX_ORACLE_QUBITS: usize = 5;

/// Density matrices above this width are refused.
pub const MAX_DENSITY_QUBITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    TooManyQubits { qubits: usize, max: usize },
    EmptyKeepSet,
    KeepIndexOutOfRange { index: usize, num_qubits: usize },
    DimensionMismatch { a: usize, b: usize },
    /// Register counts or widths outside the oracle's supported scale.
    ScaleExceeded,
    Qsim(QsimError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyQubits { qubits, max } => {
                write!(f, "{qubits} qubits exceeds the oracle cap of {max}")
            }
            OracleError::EmptyKeepSet => write!(f, "partial trace must keep at least one qubit"),
            OracleError::KeepIndexOutOfRange { index, num_qubits } => {
                write!(f, "keep index {index} out of range for {num_qubits} qubits")
            }
            OracleError::DimensionMismatch { a, b } => write!(f, "dimension mismatch: {a} vs {b}"),
            OracleError::ScaleExceeded => write!(f, "instance exceeds the oracle's supported scale"),
            OracleError::Qsim(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OracleError {}

impl From<QsimError> for OracleError {
    fn from(e: QsimError) -> Self {
        OracleError::Qsim(e)
    }
}

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        out
    }

    /// Kronecker product with `other` occupying the low-order bits.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.dim * other.dim;
        let mut out = DenseMatrix::zeros(n);
        for ra in 0..self.dim {
            for ca in 0..self.dim {
                let a = self.get(ra, ca);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for rb in 0..other.dim {
                    for cb in 0..other.dim {
                        out.set(ra * other.dim + rb, ca * other.dim + cb, a * other.get(rb, cb));
                    }
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[r] += self.data[r * self.dim + c] * v[c];
            }
        }
        out
    }

    /// max |(U†U − I)_{rc}|
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.dagger().mul(self);
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let expect = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p.get(r, c) - Complex64::new(expect, 0.0)).norm());
            }
        }
        worst
    }
}

fn pauli(axis: char) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        'x' => [[z, one], [one, z]],
        'y' => [[z, -i], [i, z]],
        _ => [[one, z], [z, -one]],
    }
}

/// 2×2 matrix exponential by plain series summation.
fn expm2(a: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut result = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
    let mut term = result;
    for k in 1..64 {
        let mut next = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                next[r][c] = (term[r][0] * a[0][c] + term[r][1] * a[1][c]) / k as f64;
            }
        }
        term = next;
        let mut mag = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                result[r][c] += term[r][c];
                mag = mag.max(term[r][c].norm());
            }
        }
        if mag < 1e-18 {
            break;
        }
    }
    result
}

/// `exp(-i P θ / 2)` for a Pauli axis, via the series exponential.
pub fn pauli_rotation(axis: char, theta: f64) -> [[Complex64; 2]; 2] {
    let p = pauli(axis);
    let factor = Complex64::new(0.0, -theta / 2.0);
    let mut a = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            a[r][c] = factor * p[r][c];
        }
    }
    expm2(a)
}

/// The general rotation as the ordered product of three series exponentials.
pub fn rg_matrix_series(theta1: f64, theta2: f64, theta3: f64) -> [[Complex64; 2]; 2] {
    let a = pauli_rotation('x', theta1);
    let b = pauli_rotation('z', theta2);
    let c = pauli_rotation('x', theta3);
    let mut ab = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for cc in 0..2 {
            ab[r][cc] = a[r][0] * b[0][cc] + a[r][1] * b[1][cc];
        }
    }
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for cc in 0..2 {
            out[r][cc] = ab[r][0] * c[0][cc] + ab[r][1] * c[1][cc];
        }
    }
    out
}

fn embed_single(num_qubits: usize, qubit: usize, u: [[Complex64; 2]; 2]) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(2);
    for r in 0..2 {
        for c in 0..2 {
            m.set(r, c, u[r][c]);
        }
    }
    let low = DenseMatrix::identity(1 << qubit);
    let high = DenseMatrix::identity(1 << (num_qubits - 1 - qubit));
    high.kron(&m.kron(&low))
}

fn full_gate_matrix(num_qubits: usize, gate: &Gate, slot_values: &[f64]) -> Result<DenseMatrix, OracleError> {
    gate.validate(num_qubits)?;
    for &s in &gate.slots {
        if s >= slot_values.len() {
            return Err(OracleError::Qsim(QsimError::SlotOutOfRange {
                slot: s,
                num_slots: slot_values.len(),
            }));
        }
    }
    let dim = 1 << num_qubits;
    Ok(match gate.kind {
        GateKind::Rx => embed_single(num_qubits, gate.targets[0], pauli_rotation('x', slot_values[gate.slots[0]])),
        GateKind::Ry => embed_single(num_qubits, gate.targets[0], pauli_rotation('y', slot_values[gate.slots[0]])),
        GateKind::Rz => embed_single(num_qubits, gate.targets[0], pauli_rotation('z', slot_values[gate.slots[0]])),
        GateKind::Rg => embed_single(
            num_qubits,
            gate.targets[0],
            rg_matrix_series(
                slot_values[gate.slots[0]],
                slot_values[gate.slots[1]],
                slot_values[gate.slots[2]],
            ),
        ),
        GateKind::Cz => {
            let mask = (1usize << gate.targets[0]) | (1usize << gate.targets[1]);
            let mut m = DenseMatrix::identity(dim);
            for i in 0..dim {
                if i & mask == mask {
                    m.set(i, i, Complex64::new(-1.0, 0.0));
                }
            }
            m
        }
        GateKind::Cx => {
            let cmask = 1usize << gate.targets[0];
            let tmask = 1usize << gate.targets[1];
            let mut m = DenseMatrix::zeros(dim);
            for col in 0..dim {
                let row = if col & cmask == cmask { col ^ tmask } else { col };
                m.set(row, col, Complex64::new(1.0, 0.0));
            }
            m
        }
    })
}

/// Full circuit unitary by naive matrix products in gate order.
pub fn dense_circuit_matrix(
    num_qubits: usize,
    gates: &[Gate],
    slot_values: &[f64],
) -> Result<DenseMatrix, OracleError> {
    if num_qubits == 0 || num_qubits > MAX_ORACLE_QUBITS {
        return Err(OracleError::TooManyQubits { qubits: num_qubits, max: MAX_ORACLE_QUBITS });
    }
    let mut m = DenseMatrix::identity(1 << num_qubits);
    for gate in gates {
        m = full_gate_matrix(num_qubits, gate, slot_values)?.mul(&m);
    }
    Ok(m)
}

/// Explicit density matrix over a small register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub num_qubits: usize,
    pub mat: DenseMatrix,
}

impl DensityMatrix {
    pub fn from_statevector(state: &StateVector) -> Result<Self, OracleError> {
        let n = state.num_qubits();
        if n > MAX_DENSITY_QUBITS {
            return Err(OracleError::TooManyQubits { qubits: n, max: MAX_DENSITY_QUBITS });
        }
        let amps = state.amplitudes();
        let mut mat = DenseMatrix::zeros(amps.len());
        for (r, a) in amps.iter().enumerate() {
            for (c, b) in amps.iter().enumerate() {
                mat.set(r, c, a * b.conj());
            }
        }
        Ok(DensityMatrix { num_qubits: n, mat })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.mat.dim).map(|i| self.mat.get(i, i)).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.mat.dim {
            for c in 0..self.mat.dim {
                worst = worst.max((self.mat.get(r, c) - self.mat.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Positive semidefiniteness via Cholesky of ρ + tol·I: the factorization
    /// succeeds with nonnegative pivots iff all eigenvalues are ≥ -tol.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let n = self.mat.dim;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut diag = self.mat.get(j, j).re + tol;
            for k in 0..j {
                diag -= l[j * n + k].norm_sqr();
            }
            if diag < -1e-12 {
                return false;
            }
            let pivot = diag.max(0.0).sqrt();
            l[j * n + j] = Complex64::new(pivot, 0.0);
            for i in j + 1..n {
                let mut v = self.mat.get(i, j);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = if pivot > 1e-300 { v / pivot } else { Complex64::new(0.0, 0.0) };
            }
        }
        true
    }

    /// `U ρ U†`.
    pub fn apply_unitary(&self, u: &DenseMatrix) -> Result<DensityMatrix, OracleError> {
        if u.dim != self.mat.dim {
            return Err(OracleError::DimensionMismatch { a: u.dim, b: self.mat.dim });
        }
        Ok(DensityMatrix { num_qubits: self.num_qubits, mat: u.mul(&self.mat).mul(&u.dagger()) })
    }

    /// `Tr[ρ O]` for a weighted-Z observable on this register.
    pub fn expectation(&self, obs: &Observable) -> Result<f64, OracleError> {
        for &(q, _) in obs.terms() {
            if q >= self.num_qubits {
                return Err(OracleError::Qsim(QsimError::ObservableIndexOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                }));
            }
        }
        let mut total = 0.0;
        for i in 0..self.mat.dim {
            let p = self.mat.get(i, i).re;
            for &(q, w) in obs.terms() {
                if i & (1usize << q) == 0 {
                    total += w * p;
                } else {
                    total -= w * p;
                }
            }
        }
        Ok(total / obs.normalization() as f64)
    }
}

/// Exact partial trace keeping `keep` (any order; the kept qubits are
/// relabeled 0.. in ascending order of their original indices).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, OracleError> {
    if keep.is_empty() {
        return Err(OracleError::EmptyKeepSet);
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    for &k in &keep_sorted {
        if k >= rho.num_qubits {
            return Err(OracleError::KeepIndexOutOfRange { index: k, num_qubits: rho.num_qubits });
        }
    }
    let drop: Vec<usize> = (0..rho.num_qubits).filter(|q| !keep_sorted.contains(q)).collect();
    let kd = keep_sorted.len();
    let out_dim = 1usize << kd;
    let env_dim = 1usize << drop.len();
    let assemble = |kept_bits: usize, env_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in keep_sorted.iter().enumerate() {
            if kept_bits & (1 << pos) != 0 {
                idx |= 1 << q;
            }
        }
        for (pos, &q) in drop.iter().enumerate() {
            if env_bits & (1 << pos) != 0 {
                idx |= 1 << q;
            }
        }
        idx
    };
    let mut out = DenseMatrix::zeros(out_dim);
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..env_dim {
                acc += rho.mat.get(assemble(r, t), assemble(c, t));
            }
            out.set(r, c, acc);
        }
    }
    Ok(DensityMatrix { num_qubits: kd, mat: out })
}

/// Replays an assembled QGCN as a density-matrix pipeline, taking the partial
/// trace after every pooling layer, and returns the expectation of the mean-Z
/// observable over the final survivors. This is the non-deferred reference
/// the statevector path must agree with.
pub fn density_pipeline_expectation(
    model: &QgcnModel,
    slot_values: &[f64],
) -> Result<f64, OracleError> {
    let n = model.spec.num_qubits;
    if n > MAX_ORACLE_QUBITS {
        return Err(OracleError::TooManyQubits { qubits: n, max: MAX_ORACLE_QUBITS });
    }
    let init = StateVector::zero(n)?;
    let mut rho = DensityMatrix::from_statevector(&init)?;
    // Feature map on the full register.
    let fm_end = model.gate_layer_bounds[0];
    let mut live: Vec<usize> = (0..n).collect();
    let relabel = |gate: &Gate, live: &[usize]| -> Gate {
        let mut g = gate.clone();
        for t in &mut g.targets {
            let pos = live.iter().position(|&q| q == *t).expect("gate acts on a live qubit");
            *t = pos;
        }
        g
    };
    let apply_range = |rho: &DensityMatrix, range: core::ops::Range<usize>, live: &[usize]| {
        let mut acc = rho.clone();
        for gate in &model.spec.gates[range] {
            let local = relabel(gate, live);
            let u = full_gate_matrix(live.len(), &local, slot_values)?;
            acc = acc.apply_unitary(&u)?;
        }
        Ok::<_, OracleError>(acc)
    };
    rho = apply_range(&rho, 0..fm_end, &live)?;
    for (layer, pool) in model.pool_plan.layers.iter().enumerate() {
        let range = model.gate_layer_bounds[layer]..model.gate_layer_bounds[layer + 1];
        rho = apply_range(&rho, range, &live)?;
        // Trace out this layer's discarded qubits (by local position).
        let keep: Vec<usize> = pool
            .survivors
            .iter()
            .map(|q| live.iter().position(|l| l == q).expect("survivor is live"))
            .collect();
        rho = partial_trace(&rho, &keep)?;
        live = pool.survivors.clone();
    }
    let obs = Observable::mean_magnetization(&(0..live.len()).collect::<Vec<_>>())?;
    rho.expectation(&obs)
}

/// Outcome of the product-state equivalence check: the expectation of the
/// register-averaged observable over the joint product state versus the mean
/// of the per-register expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub joint: f64,
    pub per_register_mean: f64,
    pub abs_diff: f64,
}

/// Runs one QGCN per neighbor register on the attention-scaled feature
/// encoding, forms the joint product of the pooled output states, and checks
/// that the register-averaged Z observable factorizes into the mean of
/// per-register expectations.
pub fn product_state_equivalence(
    model: &QgcnModel,
    theta: &[f64],
    neighbor_features: &[&[f64]],
    alphas: &[f64],
) -> Result<EquivalenceReport, OracleError> {
    let m = model.spec.num_qubits;
    if neighbor_features.is_empty()
        || neighbor_features.len() > 2
        || m > 3
        || neighbor_features.len() != alphas.len()
    {
        return Err(OracleError::ScaleExceeded);
    }
    let survivors = &model.survivors;
    let mut outputs: Vec<DensityMatrix> = Vec::new();
    let mut per_register = Vec::new();
    for (features, &alpha) in neighbor_features.iter().zip(alphas) {
        if features.len() != m {
            return Err(OracleError::DimensionMismatch { a: features.len(), b: m });
        }
        // Bind slots the way the model does: trainable from θ, features
        // scaled by the attention weight (and the encoding scale if present).
        let mut vals = vec![0.0; model.spec.num_slots()];
        for (slot, binding) in model.spec.bindings.iter().enumerate() {
            use crate::circuits::SlotBinding;
            vals[slot] = match *binding {
                SlotBinding::Trainable(i) => theta[i],
                SlotBinding::Feature { index, scale } => {
                    let s = scale.map_or(1.0, |s| theta[s]);
                    s * alpha * features[index]
                }
            };
        }
        let u = dense_circuit_matrix(m, &model.spec.gates, &vals)?;
        let rho = DensityMatrix::from_statevector(&StateVector::zero(m)?)?.apply_unitary(&u)?;
        let keep: Vec<usize> = survivors.clone();
        let sigma = partial_trace(&rho, &keep)?;
        let obs = Observable::mean_magnetization(&(0..sigma.num_qubits).collect::<Vec<_>>())?;
        per_register.push(sigma.expectation(&obs)?);
        outputs.push(sigma);
    }
    let per_register_mean = per_register.iter().sum::<f64>() / per_register.len() as f64;

    // Joint product state: register w occupies the w-th block of qubits,
    // register 0 in the low bits.
    let mut joint = outputs[0].mat.clone();
    for sigma in &outputs[1..] {
        joint = sigma.mat.kron(&joint);
    }
    let s = outputs[0].num_qubits;
    let total_qubits = s * outputs.len();
    let joint_rho = DensityMatrix { num_qubits: total_qubits, mat: joint };
    let terms: Vec<(usize, f64)> = (0..outputs.len())
        .flat_map(|w| (0..s).map(move |p| (w * s + p, 1.0)))
        .collect();
    let joint_obs = Observable::new(terms, s * outputs.len())?;
    let joint_value = joint_rho.expectation(&joint_obs)?;

    Ok(EquivalenceReport {
        joint: joint_value,
        per_register_mean,
        abs_diff: (joint_value - per_register_mean).abs(),
    })
}

/// Central finite differences of `f` at `params`.
pub fn finite_difference(
    params: &[f64],
    step: f64,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> Vec<f64> {
    let mut work = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let orig = work[k];
        work[k] = orig + step;
        let plus = f(&work);
        work[k] = orig - step;
        let minus = f(&work);
        work[k] = orig;
        out.push((plus - minus) / (2.0 * step));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim;

    #[test]
    fn empty_circuit_is_identity() {
        let m = dense_circuit_matrix(2, &[], &[]).unwrap();
        assert_eq!(m, DenseMatrix::identity(4));
        assert!(dense_circuit_matrix(6, &[], &[]).is_err());
    }

    #[test]
    fn single_cz_is_diag_1_1_1_minus_1() {
        let m = dense_circuit_matrix(2, &[Gate::cz(0, 1)], &[]).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expect = match (r, c) {
                    (3, 3) => Complex64::new(-1.0, 0.0),
                    (r, c) if r == c => Complex64::new(1.0, 0.0),
                    _ => Complex64::new(0.0, 0.0),
                };
                assert!((m.get(r, c) - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn series_rg_matches_closed_form() {
        for (t1, t2, t3) in [
            (0.0, 0.0, 0.0),
            (core::f64::consts::FRAC_PI_2, core::f64::consts::FRAC_PI_2, core::f64::consts::FRAC_PI_2),
            (0.3, -1.2, 2.7),
        ] {
            let series = rg_matrix_series(t1, t2, t3);
            let closed = qsim::rg_matrix(t1, t2, t3);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((series[r][c] - closed[r][c]).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_pure_product_states() {
        // |00⟩⟨00| keeping qubit 0.
        let zero2 = StateVector::zero(2).unwrap();
        let rho = DensityMatrix::from_statevector(&zero2).unwrap();
        let reduced = partial_trace(&rho, &[0]).unwrap();
        assert!((reduced.mat.get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(reduced.mat.get(1, 1).norm() < 1e-15);

        // Bell state: reduced state is maximally mixed.
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(
            2,
            vec![
                Complex64::new(s, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(s, 0.0),
            ],
        )
        .unwrap();
        let rho = DensityMatrix::from_statevector(&bell).unwrap();
        let reduced = partial_trace(&rho, &[0]).unwrap();
        for (r, c, expect) in [(0, 0, 0.5), (1, 1, 0.5), (0, 1, 0.0), (1, 0, 0.0)] {
            assert!((reduced.mat.get(r, c) - Complex64::new(expect, 0.0)).norm() < 1e-15);
        }
        assert!((reduced.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[5]).is_err());
    }

    #[test]
    fn density_invariants_hold_after_unitaries() {
        let state = StateVector::zero(3).unwrap();
        let gates = [Gate::rx(0, 0), Gate::rg(1, [1, 2, 3]), Gate::cx(0, 2), Gate::cz(1, 2)];
        let vals = [0.7, -0.4, 1.9, 0.2];
        let u = dense_circuit_matrix(3, &gates, &vals).unwrap();
        assert!(u.unitarity_defect() < 1e-12);
        let rho = DensityMatrix::from_statevector(&state).unwrap().apply_unitary(&u).unwrap();
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(rho.hermiticity_defect() < 1e-10);
        assert!(rho.is_positive_semidefinite(1e-9));
    }
}
