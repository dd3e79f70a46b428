//! Attention over neighborhoods: free per-edge weights, softmax-normalized
//! logits, and the GAT-style additive score function.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::ModelError;

/// How neighbor weights α_vu are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttentionMode {
    /// α_vu = 1 everywhere.
    None,
    /// One trainable weight per directed edge, used as-is.
    Free,
    /// One trainable logit per directed edge, softmax-normalized over each
    /// node's neighborhood.
    Softmax,
    /// Additive score a·[h_v ‖ h_u] through LeakyReLU(0.2), then softmax —
    /// inductive, no per-molecule parameters.
    FeatureBased,
}

pub const LEAKY_SLOPE: f64 = 0.2;

pub fn leaky_relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

fn leaky_relu_deriv(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

/// Numerically-shifted softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Pulls a loss gradient back through the softmax:
/// given α = softmax(z) and g = ∂L/∂α, returns ∂L/∂z.
pub fn softmax_backward(alphas: &[f64], grads: &[f64]) -> Vec<f64> {
    let dot: f64 = alphas.iter().zip(grads).map(|(a, g)| a * g).sum();
    alphas.iter().zip(grads).map(|(a, g)| a * (g - dot)).collect()
}

/// GAT attention coefficients for one target node: scores each neighbor with
/// the learnable vector applied to the concatenated pair, passes the score
/// through LeakyReLU, and softmax-normalizes across the neighborhood.
///
/// `score_weights` must have length `2 · h_v.len()`.
pub fn classical_attention(
    score_weights: &[f64],
    h_v: &[f64],
    neighbors: &[&[f64]],
) -> Result<Vec<f64>, ModelError> {
    if neighbors.is_empty() {
        return Err(ModelError::EmptyNeighborhood);
    }
    if score_weights.len() != 2 * h_v.len() {
        return Err(ModelError::WidthMismatch { expected: 2 * h_v.len(), got: score_weights.len() });
    }
    let (a_self, a_neigh) = score_weights.split_at(h_v.len());
    let base: f64 = a_self.iter().zip(h_v).map(|(a, h)| a * h).sum();
    let scores: Vec<f64> = neighbors
        .iter()
        .map(|h_u| {
            if h_u.len() != h_v.len() {
                return Err(ModelError::WidthMismatch { expected: h_v.len(), got: h_u.len() });
            }
            let s: f64 = a_neigh.iter().zip(*h_u).map(|(a, h)| a * h).sum();
            Ok(leaky_relu(base + s))
        })
        .collect::<Result<_, _>>()?;
    Ok(softmax(&scores))
}

/// Like [`classical_attention`] but also pushes ∂L/∂α back onto the score
/// weights, accumulating into `dscore`.
pub fn classical_attention_backward(
    score_weights: &[f64],
    h_v: &[f64],
    neighbors: &[&[f64]],
    dalpha: &[f64],
    dscore: &mut [f64],
) -> Result<(), ModelError> {
    let (a_self, a_neigh) = score_weights.split_at(h_v.len());
    let base: f64 = a_self.iter().zip(h_v).map(|(a, h)| a * h).sum();
    let raw: Vec<f64> = neighbors
        .iter()
        .map(|h_u| base + a_neigh.iter().zip(*h_u).map(|(a, h)| a * h).sum::<f64>())
        .collect();
    let scores: Vec<f64> = raw.iter().map(|&z| leaky_relu(z)).collect();
    let alphas = softmax(&scores);
    let dscores = softmax_backward(&alphas, dalpha);
    for ((z, h_u), ds) in raw.iter().zip(neighbors).zip(dscores) {
        let dz = ds * leaky_relu_deriv(*z);
        for (k, h) in h_v.iter().enumerate() {
            dscore[k] += dz * h;
        }
        for (k, h) in h_u.iter().enumerate() {
            dscore[h_v.len() + k] += dz * h;
        }
    }
    Ok(())
}

/// Element-wise mean of the weighted rows `α_u · x_u`.
pub fn aggregate_mean(rows: &[&[f64]], weights: &[f64]) -> Result<Vec<f64>, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::EmptyNeighborhood);
    }
    if rows.len() != weights.len() {
        return Err(ModelError::WeightCountMismatch { rows: rows.len(), weights: weights.len() });
    }
    let width = rows[0].len();
    let mut out = vec![0.0; width];
    for (row, &w) in rows.iter().zip(weights) {
        if row.len() != width {
            return Err(ModelError::WidthMismatch { expected: width, got: row.len() });
        }
        for (o, x) in out.iter_mut().zip(*row) {
            *o += w * x;
        }
    }
    let n = rows.len() as f64;
    for o in &mut out {
        *o /= n;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_neighbors_get_uniform_coefficients() {
        let a = vec![0.3; 6];
        let h = [0.5, -0.2, 0.9];
        let n1 = [0.1, 0.2, 0.3];
        let coeffs = classical_attention(&a, &h, &[&n1, &n1, &n1]).unwrap();
        for c in &coeffs {
            assert!((c - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((coeffs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_of_known_scores() {
        let s = softmax(&[0.0, 0.0]);
        assert_eq!(s, vec![0.5, 0.5]);
        let s = softmax(&[1.0, 0.0]);
        let e = core::f64::consts::E;
        assert!((s[0] - e / (e + 1.0)).abs() < 1e-12);
        assert!((s[0] - 0.7310585786300049).abs() < 1e-12);
        assert!((s[1] - 0.2689414213699951).abs() < 1e-12);
    }

    #[test]
    fn attention_requires_neighbors() {
        let a = vec![0.0; 2];
        assert!(matches!(classical_attention(&a, &[1.0], &[]), Err(ModelError::EmptyNeighborhood)));
    }

    #[test]
    fn weighted_mean_examples() {
        let r1 = [1.0, 0.0];
        let r2 = [0.0, 1.0];
        assert_eq!(aggregate_mean(&[&r1, &r2], &[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(aggregate_mean(&[&r1, &r2], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(aggregate_mean(&[&r1, &r2], &[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let bad = [1.0, 2.0, 3.0];
        assert!(aggregate_mean(&[&r1, &bad], &[1.0, 1.0]).is_err());
        assert!(aggregate_mean(&[&r1], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn score_gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let h: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n1: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dalpha = [0.7, -0.4];
        let loss = |a: &[f64]| {
            let c = classical_attention(a, &h, &[&n1, &n2]).unwrap();
            c[0] * dalpha[0] + c[1] * dalpha[1]
        };
        let mut dscore = vec![0.0; 6];
        classical_attention_backward(&a, &h, &[&n1, &n2], &dalpha, &mut dscore).unwrap();
        for k in 0..6 {
            let mut ap = a.clone();
            ap[k] += 1e-6;
            let mut am = a.clone();
            am[k] -= 1e-6;
            let fd = (loss(&ap) - loss(&am)) / 2e-6;
            assert!((fd - dscore[k]).abs() < 1e-7, "k={k}: {fd} vs {}", dscore[k]);
        }
    }
}
