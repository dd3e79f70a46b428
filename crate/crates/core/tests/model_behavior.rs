//! Model-level behavior: the hand-rolled aggregation trace, the circuit dump
//! golden file, and the product-state equivalence report.

use qgat_core::circuits::{build_qgcn, QgcnConfig};
use qgat_core::graph::{DatasetSplit, MolecularGraph, NUM_FEATURES};
use qgat_core::models::{
    AggregationMode, AttentionMode, ModelConfig, ModelInstance, ModelKindConfig,
};
use qgat_core::oracle::product_state_equivalence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The committed dump of the 2-qubit, depth-[1] circuit pins the textual
/// format and the W-cell gate order.
#[test]
fn circuit_dump_matches_golden_file() {
    let model = build_qgcn(&QgcnConfig::new(2, vec![1])).unwrap();
    let expected = include_str!("data/qgcn_2q_depth1.txt");
    assert_eq!(model.spec.dump(), expected);
}

#[test]
fn forward_molecule_matches_hand_rolled_trace_on_a_path_graph() {
    // 3-node path 0–1–2 with an affine 8→1 sub-model whose weights we set by
    // hand, so the whole aggregation loop can be traced on paper.
    let rows = [
        [0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70],
        [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65],
        [0.90, 0.80, 0.70, 0.60, 0.50, 0.40, 0.30],
    ];
    let graph = MolecularGraph::new(
        "path3".to_string(),
        rows.to_vec(),
        &[(0, 1), (1, 2)],
        0.0,
    )
    .unwrap();
    let split =
        DatasetSplit { graphs: vec![graph.clone()], max_atoms: 3, sample_seed: 0, normalization: None };
    let cfg = ModelConfig {
        kind: ModelKindConfig::Classical { hidden: vec![] },
        aggregation: AggregationMode::Single,
        attention: AttentionMode::None,
        seed: 0,
    };
    let mut model = ModelInstance::new(&cfg, &split).unwrap();
    // Affine map: out = Σ_k x_k + 0.5·prev + bias 0.25.
    let theta = model.store.segment_values_mut("mlp.0").unwrap();
    for w in theta.iter_mut().take(NUM_FEATURES) {
        *w = 1.0;
    }
    theta[NUM_FEATURES] = 0.5;
    theta[8] = 0.25;

    // Hand trace: node 0 aggregates row 1, node 1 the mean of rows 0 and 2,
    // node 2 row 1 again; prev chains 0 → out0 → out1.
    let sum = |r: &[f64; 7]| r.iter().sum::<f64>();
    let out0 = sum(&rows[1]) + 0.25;
    let mean02: f64 = (sum(&rows[0]) + sum(&rows[2])) / 2.0;
    let out1 = mean02 + 0.5 * out0 + 0.25;
    let out2 = sum(&rows[1]) + 0.5 * out1 + 0.25;
    let expected = (out0 + out1 + out2) / 3.0;

    let got = model.forward_molecule(&graph, 0).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    // Frozen value of the same trace, as a guard against silent drift in the
    // hand arithmetic above: out0 = 2.70, out1 = 5.10, out2 = 5.25.
    assert!((got - 4.35).abs() < 1e-12, "{got}");
}

#[test]
fn product_state_equivalence_holds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut cfg = QgcnConfig::new(2, vec![1]);
    cfg.trainable_scales = true;
    let model = build_qgcn(&cfg).unwrap();

    // Single neighbor: trivially equal.
    let theta: Vec<f64> = (0..model.num_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f1: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
    let report = product_state_equivalence(&model, &theta, &[&f1], &[0.8]).unwrap();
    assert!(report.abs_diff < 1e-12);

    // Two identical neighbors with identical weights.
    let report = product_state_equivalence(&model, &theta, &[&f1, &f1], &[0.8, 0.8]).unwrap();
    assert!(report.abs_diff < 1e-12);

    // Random pairs, random attention, shallow random circuits.
    for _ in 0..25 {
        let theta: Vec<f64> = (0..model.num_params()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let fa: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
        let fb: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
        let alphas = [rng.gen_range(0.2..1.8), rng.gen_range(0.2..1.8)];
        let report = product_state_equivalence(&model, &theta, &[&fa, &fb], &alphas).unwrap();
        assert!(
            report.abs_diff < 1e-10,
            "joint {} vs mean {}",
            report.joint,
            report.per_register_mean
        );
    }
}

#[test]
fn parameter_counts_match_the_published_configuration() {
    let mut qc = QgcnConfig::new(8, vec![3, 1, 1]);
    qc.trainable_scales = true;
    let split = DatasetSplit {
        graphs: vec![MolecularGraph::new(
            "m".to_string(),
            vec![[0.0; NUM_FEATURES]; 2],
            &[(0, 1)],
            0.0,
        )
        .unwrap()],
        max_atoms: 9,
        sample_seed: 0,
        normalization: None,
    };
    let cfg = ModelConfig {
        kind: ModelKindConfig::Quantum(qc),
        aggregation: AggregationMode::Single,
        attention: AttentionMode::None,
        seed: 1,
    };
    let model = ModelInstance::new(&cfg, &split).unwrap();
    assert_eq!(model.count_params().total, 218);
}
