//! Two-layer MLP for XOR: 2 inputs, tanh hidden layer, 2-way softmax head.
//!
//! Flattening order (graph node i = parameter i):
//! ```text
//! w1   [hidden x 2]  row-major   hidden weights
//! b1   [hidden]                  hidden biases
//! w2   [2 x hidden]  row-major   output weights
//! b2   [2]                       output biases
//! ```
//! N = 5 * hidden + 2. Initialization is scaled-uniform fan-in:
//! weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.

use super::{Architecture, Example, TrainError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct XorMlp {
    hidden: usize,
}

impl XorMlp {
    pub fn new(hidden: usize) -> Result<Self, TrainError> {
        if hidden == 0 {
            return Err(TrainError::InvalidModel("hidden_width must be >= 1".into()));
        }
        Ok(XorMlp { hidden })
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden
    }

    fn forward(&self, params: &[f64], ex: &Example, hidden_out: &mut [f64]) -> [f64; 2] {
        let h = self.hidden;
        let (w1, rest) = params.split_at(2 * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(2 * h);
        let x = [ex.a as f64, ex.b as f64];
        for j in 0..h {
            let u = w1[2 * j] * x[0] + w1[2 * j + 1] * x[1] + b1[j];
            hidden_out[j] = u.tanh();
        }
        let mut logits = [b2[0], b2[1]];
        for k in 0..2 {
            for j in 0..h {
                logits[k] += w2[k * h + j] * hidden_out[j];
            }
        }
        logits
    }
}

/// Softmax cross-entropy over the logits: returns (loss, probabilities,
/// argmax with first-max tie-break).
fn softmax_ce(logits: &[f64], label: usize) -> (f64, Vec<f64>, usize) {
    let mut max = logits[0];
    let mut argmax = 0;
    for (i, &z) in logits.iter().enumerate() {
        if z > max {
            max = z;
            argmax = i;
        }
    }
    let mut probs: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= sum;
    }
    let loss = -probs[label].ln();
    (loss, probs, argmax)
}

impl Architecture for XorMlp {
    fn n_params(&self) -> usize {
        5 * self.hidden + 2
    }

    fn init_params(&self, init_seed: u64) -> Vec<f32> {
        let h = self.hidden;
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        let mut params = vec![0.0f32; self.n_params()];
        let bound_w1 = 1.0 / (2.0f64).sqrt();
        for p in params[..2 * h].iter_mut() {
            *p = rng.gen_range(-bound_w1..bound_w1) as f32;
        }
        // b1 stays zero
        let bound_w2 = 1.0 / (h as f64).sqrt();
        for p in params[3 * h..5 * h].iter_mut() {
            *p = rng.gen_range(-bound_w2..bound_w2) as f32;
        }
        // b2 stays zero
        params
    }

    fn accumulate_loss_grad(
        &self,
        params: &[f64],
        examples: &[Example],
        grad_sum: &mut [f64],
    ) -> (f64, usize) {
        let h = self.hidden;
        debug_assert_eq!(params.len(), self.n_params());
        debug_assert_eq!(grad_sum.len(), self.n_params());
        let mut hidden = vec![0.0f64; h];
        let mut loss_sum = 0.0;
        let mut correct = 0usize;

        for ex in examples {
            let logits = self.forward(params, ex, &mut hidden);
            let label = ex.label as usize;
            let (loss, probs, argmax) = softmax_ce(&logits, label);
            loss_sum += loss;
            if argmax == label {
                correct += 1;
            }

            // dL/dz_k = p_k - y_k
            let mut dz = [probs[0], probs[1]];
            dz[label] -= 1.0;

            let (w1g, rest) = grad_sum.split_at_mut(2 * h);
            let (b1g, rest) = rest.split_at_mut(h);
            let (w2g, b2g) = rest.split_at_mut(2 * h);
            let w2 = &params[3 * h..5 * h];
            let x = [ex.a as f64, ex.b as f64];

            for k in 0..2 {
                b2g[k] += dz[k];
                for j in 0..h {
                    w2g[k * h + j] += dz[k] * hidden[j];
                }
            }
            for j in 0..h {
                let dh = dz[0] * w2[j] + dz[1] * w2[h + j];
                let du = dh * (1.0 - hidden[j] * hidden[j]);
                b1g[j] += du;
                w1g[2 * j] += du * x[0];
                w1g[2 * j + 1] += du * x[1];
            }
        }
        (loss_sum, correct)
    }

    fn evaluate(&self, params: &[f64], examples: &[Example]) -> (f64, usize) {
        let h = self.hidden;
        let mut hidden = vec![0.0f64; h];
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for ex in examples {
            let logits = self.forward(params, ex, &mut hidden);
            let (loss, _probs, argmax) = softmax_ce(&logits, ex.label as usize);
            loss_sum += loss;
            if argmax == ex.label as usize {
                correct += 1;
            }
        }
        (loss_sum, correct)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::{batch_loss_grad, build_xor_dataset};

    #[test]
    fn param_count_is_5h_plus_2() {
        for h in [1, 8, 16, 64] {
            assert_eq!(XorMlp::new(h).unwrap().n_params(), 5 * h + 2);
        }
    }

    #[test]
    fn zero_params_give_uniform_head() {
        // All-zero parameters: logits are equal, the argmax tie-break picks
        // class 0, so exactly the two label-0 patterns are "correct".
        let mlp = XorMlp::new(16).unwrap();
        let params = vec![0.0f64; mlp.n_params()];
        let data = build_xor_dataset();
        let (loss, acc, _grad) = batch_loss_grad(&mlp, &params, &data);
        assert!((loss - (2.0f64).ln()).abs() < 1e-12, "loss {loss}");
        assert!((acc - 0.5).abs() < 1e-12, "acc {acc}");
    }

    #[test]
    fn duplicated_example_has_same_mean_grad() {
        let mlp = XorMlp::new(8).unwrap();
        let params: Vec<f64> =
            mlp.init_params(3).iter().map(|&p| p as f64).collect();
        let ex = Example { a: 1, b: 0, label: 1 };
        let (l1, _a1, g1) = batch_loss_grad(&mlp, &params, &[ex]);
        let dup = vec![ex; 7];
        let (l7, _a7, g7) = batch_loss_grad(&mlp, &params, &dup);
        assert!((l1 - l7).abs() < 1e-12);
        for (a, b) in g1.iter().zip(g7.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
