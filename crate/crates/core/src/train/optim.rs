//! Optimizers over the flat parameter vector.
//!
//! Update math runs in f64 against the promoted parameters and writes back
//! f32. Weight decay is decoupled (applied to the parameters before the
//! gradient step), so the gradients handed to the probe stay pure loss
//! gradients.

use super::OptimizerSpec;

pub struct Optimizer {
    spec: OptimizerSpec,
    /// Adam first/second moment estimates; empty for SGD.
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Optimizer {
    pub fn new(spec: OptimizerSpec, n_params: usize) -> Self {
        let (m, v) = match spec {
            OptimizerSpec::Adam { .. } => (vec![0.0; n_params], vec![0.0; n_params]),
            OptimizerSpec::Sgd { .. } => (Vec::new(), Vec::new()),
        };
        Optimizer { spec, m, v, t: 0 }
    }

    pub fn step(&mut self, params: &mut [f32], grad: &[f64]) {
        assert_eq!(params.len(), grad.len());
        match self.spec {
            OptimizerSpec::Sgd { lr } => {
                for (p, &g) in params.iter_mut().zip(grad.iter()) {
                    *p = (*p as f64 - lr * g) as f32;
                }
            }
            OptimizerSpec::Adam { lr, weight_decay, beta1, beta2, eps } => {
                self.t += 1;
                let bc1 = 1.0 - beta1.powi(self.t as i32);
                let bc2 = 1.0 - beta2.powi(self.t as i32);
                for i in 0..params.len() {
                    let mut p = params[i] as f64;
                    p *= 1.0 - lr * weight_decay;
                    let g = grad[i];
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
                    let m_hat = self.m[i] / bc1;
                    let v_hat = self.v[i] / bc2;
                    p -= lr * m_hat / (v_hat.sqrt() + eps);
                    params[i] = p as f32;
                }
            }
        }
    }
}
