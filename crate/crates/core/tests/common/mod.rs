//! Shared helpers for the integration suites: random circuit generation and
//! scrambled start states.

use qgat_core::qsim::{Gate, StateVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Random circuit over `num_qubits` with at most `max_params` parameter
/// slots. Returns the gates and one value per slot.
pub fn random_circuit(rng: &mut ChaCha8Rng, num_qubits: usize, max_params: usize) -> (Vec<Gate>, Vec<f64>) {
    let mut gates = Vec::new();
    let mut values = Vec::new();
    loop {
        let remaining = max_params - values.len();
        if remaining == 0 {
            break;
        }
        let choice = rng.gen_range(0..8);
        match choice {
            0..=2 => {
                let q = rng.gen_range(0..num_qubits);
                let slot = values.len();
                values.push(rng.gen_range(-PI..PI));
                gates.push(match choice {
                    0 => Gate::rx(q, slot),
                    1 => Gate::ry(q, slot),
                    _ => Gate::rz(q, slot),
                });
            }
            3 if remaining >= 3 => {
                let q = rng.gen_range(0..num_qubits);
                let slot = values.len();
                values.extend((0..3).map(|_| rng.gen_range(-PI..PI)));
                gates.push(Gate::rg(q, [slot, slot + 1, slot + 2]));
            }
            4..=5 if num_qubits > 1 => {
                let a = rng.gen_range(0..num_qubits);
                let b = (a + 1 + rng.gen_range(0..num_qubits - 1)) % num_qubits;
                gates.push(if choice == 4 { Gate::cz(a, b) } else { Gate::cx(a, b) });
            }
            _ => {}
        }
        // Leave room for the occasional early stop so lengths vary.
        if values.len() >= max_params || (gates.len() > 4 && rng.gen_bool(0.08)) {
            break;
        }
    }
    if values.is_empty() {
        let slot = values.len();
        values.push(rng.gen_range(-PI..PI));
        gates.push(Gate::rx(0, slot));
    }
    (gates, values)
}

/// A generic (non-basis) start state produced by a short scramble circuit.
pub fn scrambled_state(rng: &mut ChaCha8Rng, num_qubits: usize) -> StateVector {
    let (gates, values) = random_circuit(rng, num_qubits, 6);
    let init = StateVector::zero(num_qubits).unwrap();
    qgat_core::qsim::run(&gates, &values, &init).unwrap()
}
