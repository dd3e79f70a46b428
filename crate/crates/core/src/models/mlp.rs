//! Dense multilayer perceptron used by the classical baselines: ReLU on
//! hidden layers, identity on the scalar output.

use alloc::vec;
use alloc::vec::Vec;

use super::ModelError;

/// Layer widths including input and output, e.g. `[8, 8, 1]`. Parameters
/// are stored flat per layer: row-major weights, then biases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
}

impl MlpSpec {
    /// `input -> hidden... -> 1`.
    pub fn new(input: usize, hidden: &[usize]) -> Self {
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(input);
        widths.extend_from_slice(hidden);
        widths.push(1);
        MlpSpec { widths }
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    /// Σ (w_in · w_out + w_out) over layers.
    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn forward(&self, theta: &[f64], x: &[f64]) -> Result<f64, ModelError> {
        self.check(theta, x)?;
        let mut h: Vec<f64> = x.to_vec();
        let mut off = 0;
        for (l, w) in self.widths.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let last = l == self.widths.len() - 2;
            let mut z = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &theta[off + o * n_in..off + (o + 1) * n_in];
                let mut acc = theta[off + n_in * n_out + o];
                for (wi, hi) in row.iter().zip(&h) {
                    acc += wi * hi;
                }
                z[o] = if last || acc > 0.0 { acc } else { 0.0 };
            }
            off += n_in * n_out + n_out;
            h = z;
        }
        Ok(h[0])
    }

    /// Output, gradient with respect to every parameter, and gradient with
    /// respect to the input vector.
    pub fn forward_grad(&self, theta: &[f64], x: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>), ModelError> {
        self.check(theta, x)?;
        let layers = self.widths.len() - 1;
        // Forward, keeping post-activation values per layer (acts[0] = x).
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        let mut off = 0;
        let mut offsets = Vec::with_capacity(layers);
        for (l, w) in self.widths.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            offsets.push(off);
            let last = l == layers - 1;
            let mut z = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &theta[off + o * n_in..off + (o + 1) * n_in];
                let mut acc = theta[off + n_in * n_out + o];
                for (wi, hi) in row.iter().zip(&acts[l]) {
                    acc += wi * hi;
                }
                z[o] = if last || acc > 0.0 { acc } else { 0.0 };
            }
            off += n_in * n_out + n_out;
            acts.push(z);
        }
        let out = acts[layers][0];

        // Reverse sweep: delta holds d out / d activation of the current layer.
        let mut dtheta = vec![0.0; self.param_count()];
        let mut delta = vec![1.0];
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let off = offsets[l];
            let last = l == layers - 1;
            let mut dprev = vec![0.0; n_in];
            for o in 0..n_out {
                // Hidden ReLU: zero gradient where the unit was clamped.
                let d = if last || acts[l + 1][o] > 0.0 { delta[o] } else { 0.0 };
                if d == 0.0 {
                    continue;
                }
                for i in 0..n_in {
                    dtheta[off + o * n_in + i] += d * acts[l][i];
                    dprev[i] += d * theta[off + o * n_in + i];
                }
                dtheta[off + n_in * n_out + o] += d;
            }
            delta = dprev;
        }
        Ok((out, dtheta, delta))
    }

    fn check(&self, theta: &[f64], x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.input_width() {
            return Err(ModelError::WidthMismatch { expected: self.input_width(), got: x.len() });
        }
        if theta.len() != self.param_count() {
            return Err(ModelError::ParamLengthMismatch { expected: self.param_count(), got: theta.len() });
        }
        Ok(())
    }
}
