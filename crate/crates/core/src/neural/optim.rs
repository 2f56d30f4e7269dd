use serde::{Deserialize, Serialize};

use super::Mlp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    RmsProp,
}

impl OptimizerKind {
    pub(crate) fn code(self) -> u8 {
        match self {
            Self::Adam => 0,
            Self::RmsProp => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Adam),
            1 => Some(Self::RmsProp),
            _ => None,
        }
    }
}

/// Moment buffers for one parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    /// Second-moment decay (Adam's β2, RMSprop's ρ).
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64, params: usize) -> Self {
        let beta2 = match kind {
            OptimizerKind::Adam => 0.999,
            OptimizerKind::RmsProp => 0.9,
        };
        Self { kind, learning_rate, beta1: 0.9, beta2, epsilon: 1e-8, m: vec![0.0; params], v: vec![0.0; params], t: 0 }
    }

    /// Optimizer named by the model's training metadata.
    pub fn for_model(model: &Mlp) -> Self {
        Self::new(model.meta.optimizer, model.meta.learning_rate, model.param_count())
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.v.len());
        assert_eq!(grad.len(), self.v.len());
        self.t += 1;
        let (lr, b1, b2, eps) = (self.learning_rate, self.beta1, self.beta2, self.epsilon);
        match self.kind {
            OptimizerKind::Adam => {
                let c1 = 1.0 - b1.powi(self.t as i32);
                let c2 = 1.0 - b2.powi(self.t as i32);
                for k in 0..params.len() {
                    self.m[k] = b1 * self.m[k] + (1.0 - b1) * grad[k];
                    self.v[k] = b2 * self.v[k] + (1.0 - b2) * grad[k] * grad[k];
                    params[k] -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + eps);
                }
            }
            OptimizerKind::RmsProp => {
                for k in 0..params.len() {
                    self.v[k] = b2 * self.v[k] + (1.0 - b2) * grad[k] * grad[k];
                    params[k] -= lr * grad[k] / (self.v[k].sqrt() + eps);
                }
            }
        }
    }
}
