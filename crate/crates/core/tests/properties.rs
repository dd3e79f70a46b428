//! Property tests for the arithmetic invariants that hold over the whole
//! input space rather than on curated fixtures.

use proptest::prelude::*;
use qgat_core::graph::{normalize, DatasetSplit, MolecularGraph, NUM_FEATURES};
use qgat_core::qsim::{self, Gate, Observable, StateVector};
use qgat_core::train::smooth_l1;

proptest! {
    #[test]
    fn smooth_l1_is_nonnegative_and_continuous_at_the_knee(
        pred in -1e3f64..1e3, target in -1e3f64..1e3
    ) {
        let v = smooth_l1(pred, target);
        prop_assert!(v >= 0.0);
        let d = (pred - target).abs();
        if d < 1.0 {
            prop_assert!((v - 0.5 * d * d).abs() < 1e-12);
        } else {
            prop_assert!((v - (d - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_is_bounded_by_the_largest_weight(
        angles in proptest::collection::vec(-3.2f64..3.2, 3),
        weights in proptest::collection::vec(-2.0f64..2.0, 3)
    ) {
        let init = StateVector::zero(3).unwrap();
        let gates = [Gate::rx(0, 0), Gate::ry(1, 1), Gate::rg(2, [2, 2, 2]), Gate::cx(0, 1), Gate::cz(1, 2)];
        let slot_values = [angles[0], angles[1], angles[2]];
        let state = qsim::run(&gates, &slot_values, &init).unwrap();
        let terms: Vec<(usize, f64)> = weights.iter().enumerate().map(|(q, &w)| (q, w)).collect();
        let obs = Observable::new(terms, 3).unwrap();
        let e = qsim::expectation(&state, &obs).unwrap();
        let bound = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        prop_assert!(e.abs() <= bound + 1e-12);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn target_normalization_round_trips(
        targets in proptest::collection::vec(-50.0f64..50.0, 2..12)
    ) {
        let graphs: Vec<MolecularGraph> = targets
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                MolecularGraph::new(format!("p{i}"), vec![[i as f64; NUM_FEATURES]], &[], t).unwrap()
            })
            .collect();
        let split = DatasetSplit { graphs, max_atoms: 1, sample_seed: 0, normalization: None };
        let split = normalize(split).unwrap();
        let record = split.normalization.as_ref().unwrap();
        for (g, &orig) in split.graphs.iter().zip(&targets) {
            prop_assert!(g.target >= 0.0 && g.target <= 1.0);
            prop_assert!((record.invert_target(g.target) - orig).abs() < 1e-12 * orig.abs().max(1.0));
        }
    }
}
