//! Molecular graphs: per-atom feature rows, undirected adjacency, a scalar
//! regression target, plus feature selection, scaling, and size-stratified
//! subset sampling.
//!
//! Ingestion of the on-disk JSONL format lives in the CLI crate; this module
//! only sees already-parsed records.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Atom features used by the models: atomic number, chirality, degree,
/// formal charge, radical electrons, hybridization state, scaled mass.
pub const NUM_FEATURES: usize = 7;

/// Width of raw upstream feature rows; columns 6–9 (aromaticity, hydrogen
/// count, ring membership, valence) are dropped on load.
pub const RAW_FEATURE_WIDTH: usize = 11;

/// Columns kept from raw 11-wide rows.
pub const SELECTED_COLUMNS: [usize; NUM_FEATURES] = [0, 1, 2, 3, 4, 5, 10];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    EmptyGraph,
    FeatureWidth { got: usize },
    EdgeOutOfRange { index: usize, atoms: usize },
    SelfLoop(usize),
    EmptySplit,
    InsufficientGraphs { available: usize, requested: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::EmptyGraph => write!(f, "graph has no atoms"),
            GraphError::FeatureWidth { got } => {
                write!(f, "feature row has width {got}, expected {NUM_FEATURES} or {RAW_FEATURE_WIDTH}")
            }
            GraphError::EdgeOutOfRange { index, atoms } => {
                write!(f, "edge endpoint {index} out of range for {atoms} atoms")
            }
            GraphError::SelfLoop(v) => write!(f, "self-loop on atom {v}"),
            GraphError::EmptySplit => write!(f, "split contains no graphs"),
            GraphError::InsufficientGraphs { available, requested } => {
                write!(f, "requested {requested} graphs but only {available} pass the filter")
            }
        }
    }
}

impl core::error::Error for GraphError {}

/// Selects the model's 7 feature columns from a raw 11-wide row.
pub fn select_feature_columns(raw: &[f64]) -> Result<[f64; NUM_FEATURES], GraphError> {
    if raw.len() != RAW_FEATURE_WIDTH {
        return Err(GraphError::FeatureWidth { got: raw.len() });
    }
    let mut out = [0.0; NUM_FEATURES];
    for (k, &col) in SELECTED_COLUMNS.iter().enumerate() {
        out[k] = raw[col];
    }
    Ok(out)
}

/// One molecule: atoms with 7-dimensional feature rows, symmetric adjacency
/// without self-loops, and a scalar target.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularGraph {
    pub id: String,
    features: Vec<[f64; NUM_FEATURES]>,
    adjacency: Vec<bool>,
    atoms: usize,
    pub target: f64,
}

impl MolecularGraph {
    /// Builds a graph from feature rows and an undirected edge list. Edges
    /// are symmetrized (either orientation may be listed); self-loops are
    /// rejected.
    pub fn new(
        id: String,
        features: Vec<[f64; NUM_FEATURES]>,
        edges: &[(usize, usize)],
        target: f64,
    ) -> Result<Self, GraphError> {
        let atoms = features.len();
        if atoms == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut adjacency = vec![false; atoms * atoms];
        for &(u, v) in edges {
            if u >= atoms || v >= atoms {
                return Err(GraphError::EdgeOutOfRange { index: u.max(v), atoms });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u * atoms + v] = true;
            adjacency[v * atoms + u] = true;
        }
        Ok(Self { id, features, adjacency, atoms, target })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    pub fn feature_row(&self, v: usize) -> &[f64; NUM_FEATURES] {
        &self.features[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.atoms + v]
    }

    /// Neighbor indices of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.adjacency[v * self.atoms..(v + 1) * self.atoms];
        row.iter().enumerate().filter(|(_, &e)| e).map(|(u, _)| u)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    /// Directed edge count: Σ_v |N(v)|.
    pub fn directed_edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&e| e).count()
    }

    fn map_features(&mut self, f: impl Fn(usize, f64) -> f64) {
        for row in &mut self.features {
            for (k, x) in row.iter_mut().enumerate() {
                *x = f(k, *x);
            }
        }
    }
}

/// Affine maps recorded by [`normalize`], sufficient to invert the target
/// scaling and to re-apply the feature scaling to unseen graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationRecord {
    pub feature_min: [f64; NUM_FEATURES],
    pub feature_max: [f64; NUM_FEATURES],
    pub target_min: f64,
    pub target_max: f64,
}

impl NormalizationRecord {
    /// Maps a normalized target in [0,1] back to original units.
    pub fn invert_target(&self, y: f64) -> f64 {
        y * (self.target_max - self.target_min) + self.target_min
    }

    pub fn apply_target(&self, y: f64) -> f64 {
        if self.target_max > self.target_min {
            (y - self.target_min) / (self.target_max - self.target_min)
        } else {
            0.0
        }
    }

    /// Feature k mapped to [0, π]; constant columns map to 0.
    pub fn apply_feature(&self, k: usize, x: f64) -> f64 {
        let span = self.feature_max[k] - self.feature_min[k];
        if span > 0.0 {
            (x - self.feature_min[k]) / span * PI
        } else {
            0.0
        }
    }
}

/// A sampled, size-filtered set of molecules ready for training.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub graphs: Vec<MolecularGraph>,
    pub max_atoms: usize,
    pub sample_seed: u64,
    pub normalization: Option<NormalizationRecord>,
}

impl DatasetSplit {
    /// (atom count, molecule count) pairs for the realized sample, ascending.
    pub fn size_histogram(&self) -> Vec<(usize, usize)> {
        let mut hist: Vec<(usize, usize)> = Vec::new();
        let mut sizes: Vec<usize> = self.graphs.iter().map(|g| g.atom_count()).collect();
        sizes.sort_unstable();
        for s in sizes {
            match hist.last_mut() {
                Some((size, count)) if *size == s => *count += 1,
                _ => hist.push((s, 1)),
            }
        }
        hist
    }

    pub fn targets(&self) -> Vec<f64> {
        self.graphs.iter().map(|g| g.target).collect()
    }
}

/// Keeps graphs with at most `max_atoms` atoms and draws `count` of them
/// without replacement. The draw is a pure function of `seed`.
pub fn filter_and_sample(
    graphs: &[MolecularGraph],
    max_atoms: usize,
    count: usize,
    seed: u64,
) -> Result<DatasetSplit, GraphError> {
    let eligible: Vec<&MolecularGraph> =
        graphs.iter().filter(|g| g.atom_count() <= max_atoms).collect();
    if eligible.len() < count || count == 0 {
        return Err(GraphError::InsufficientGraphs { available: eligible.len(), requested: count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, eligible.len(), count).into_vec();
    picked.sort_unstable();
    Ok(DatasetSplit {
        graphs: picked.into_iter().map(|i| eligible[i].clone()).collect(),
        max_atoms,
        sample_seed: seed,
        normalization: None,
    })
}

/// Affinely maps every feature column onto [0, π] and the targets onto
/// [0, 1], recording the maps for inversion. Constant columns map to 0.
pub fn normalize(mut split: DatasetSplit) -> Result<DatasetSplit, GraphError> {
    if split.graphs.is_empty() {
        return Err(GraphError::EmptySplit);
    }
    let mut record = NormalizationRecord {
        feature_min: [f64::INFINITY; NUM_FEATURES],
        feature_max: [f64::NEG_INFINITY; NUM_FEATURES],
        target_min: f64::INFINITY,
        target_max: f64::NEG_INFINITY,
    };
    for g in &split.graphs {
        for v in 0..g.atom_count() {
            for (k, &x) in g.feature_row(v).iter().enumerate() {
                record.feature_min[k] = record.feature_min[k].min(x);
                record.feature_max[k] = record.feature_max[k].max(x);
            }
        }
        record.target_min = record.target_min.min(g.target);
        record.target_max = record.target_max.max(g.target);
    }
    for g in &mut split.graphs {
        g.target = record.apply_target(g.target);
        g.map_features(|k, x| record.apply_feature(k, x));
    }
    split.normalization = Some(record);
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;

    fn row(v: f64) -> [f64; NUM_FEATURES] {
        [v, 0.0, 1.0, 0.0, 0.0, 2.0, v / 10.0]
    }

    fn toy_graphs() -> Vec<MolecularGraph> {
        (0..12)
            .map(|i| {
                let n = 1 + (i % 4);
                let rows = (0..n).map(|a| row((i + a) as f64)).collect();
                let edges: Vec<(usize, usize)> = (1..n).map(|a| (a - 1, a)).collect();
                MolecularGraph::new(format!("m{i}"), rows, &edges, i as f64).unwrap()
            })
            .collect()
    }

    #[test]
    fn single_atom_graph_is_valid() {
        let g = MolecularGraph::new("one".to_string(), vec![row(6.0)], &[], 0.5).unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(g.degree(0), 0);
    }

    #[test]
    fn raw_rows_keep_columns_0_to_5_and_10() {
        let raw: Vec<f64> = (0..11).map(|c| c as f64).collect();
        let sel = select_feature_columns(&raw).unwrap();
        assert_eq!(sel, [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0]);
        assert!(select_feature_columns(&raw[..9]).is_err());
    }

    #[test]
    fn one_sided_edges_are_symmetrized() {
        let g = MolecularGraph::new("e".to_string(), vec![row(1.0), row(2.0)], &[(0, 1)], 0.0).unwrap();
        assert!(g.has_edge(0, 1));
        assert!(g.has_edge(1, 0));
        assert!(MolecularGraph::new("bad".to_string(), vec![row(1.0)], &[(0, 0)], 0.0).is_err());
        assert!(MolecularGraph::new("oob".to_string(), vec![row(1.0)], &[(0, 3)], 0.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_size_filtered() {
        let graphs = toy_graphs();
        let a = filter_and_sample(&graphs, 3, 5, 42).unwrap();
        let b = filter_and_sample(&graphs, 3, 5, 42).unwrap();
        let ids_a: Vec<&str> = a.graphs.iter().map(|g| g.id.as_str()).collect();
        let ids_b: Vec<&str> = b.graphs.iter().map(|g| g.id.as_str()).collect();
        assert_eq!(ids_a, ids_b);
        assert!(a.graphs.iter().all(|g| g.atom_count() <= 3));
        assert!(filter_and_sample(&graphs, 1, 100, 0).is_err());
    }

    #[test]
    fn normalization_maps_to_target_ranges_and_inverts() {
        let graphs = toy_graphs();
        let split = filter_and_sample(&graphs, 4, 8, 1).unwrap();
        let originals: Vec<f64> = split.graphs.iter().map(|g| g.target).collect();
        let split = normalize(split).unwrap();
        let record = split.normalization.clone().unwrap();
        let mut saw_zero = false;
        let mut saw_pi = false;
        for g in &split.graphs {
            assert!(g.target >= 0.0 && g.target <= 1.0);
            for v in 0..g.atom_count() {
                for (k, &x) in g.feature_row(v).iter().enumerate() {
                    assert!(x >= 0.0 && x <= PI + 1e-12);
                    // Constant columns (1, 3, 4, 5 in the toy rows) map to 0.
                    if k == 1 || k == 3 {
                        assert_eq!(x, 0.0);
                    }
                    saw_zero |= x == 0.0;
                    saw_pi |= (x - PI).abs() < 1e-12;
                }
            }
        }
        assert!(saw_zero && saw_pi, "affine endpoints must be attained");
        for (g, orig) in split.graphs.iter().zip(originals) {
            assert!((record.invert_target(g.target) - orig).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_counts_sizes() {
        let graphs = toy_graphs();
        let split = filter_and_sample(&graphs, 4, 12, 9).unwrap();
        let hist = split.size_histogram();
        let total: usize = hist.iter().map(|(_, c)| c).sum();
        assert_eq!(total, 12);
        assert!(hist.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
