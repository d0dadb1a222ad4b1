use serde::{Deserialize, Serialize};

use super::Parameters;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd { momentum: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First-order optimizer over any [`Parameters`] bundle.
pub struct Optimizer<T> {
    kind: OptimizerKind,
    pub learning_rate: f64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
    steps: i32,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Optimizer {
            kind,
            learning_rate,
            first: Vec::new(),
            second: Vec::new(),
            steps: 0,
        }
    }

    pub fn step<P: Parameters<T>>(&mut self, params: &mut P, grads: &P) {
        let grads: Vec<&[T]> = grads.param_slices().into_iter().map(|(_, s)| s).collect();
        let mut slots = params.param_slices_mut();
        if self.first.is_empty() {
            self.first = slots.iter().map(|s| vec![T::zero(); s.len()]).collect();
            if matches!(self.kind, OptimizerKind::Adam { .. }) {
                self.second = self.first.clone();
            }
        }
        self.steps += 1;
        let lr = T::lit(self.learning_rate);
        match self.kind {
            OptimizerKind::Sgd { momentum } => {
                let mu = T::lit(momentum);
                for ((p, g), v) in slots.iter_mut().zip(&grads).zip(&mut self.first) {
                    for ((p, g), v) in p.iter_mut().zip(g.iter()).zip(v.iter_mut()) {
                        *v = mu * *v - lr * *g;
                        *p = *p + *v;
                    }
                }
            }
            OptimizerKind::Adam { beta1, beta2, epsilon } => {
                let (b1, b2, eps) = (T::lit(beta1), T::lit(beta2), T::lit(epsilon));
                let c1 = T::one() - b1.powi(self.steps);
                let c2 = T::one() - b2.powi(self.steps);
                let one = T::one();
                for (((p, g), m), v) in slots.iter_mut().zip(&grads).zip(&mut self.first).zip(&mut self.second) {
                    for (((p, g), m), v) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = b1 * *m + (one - b1) * *g;
                        *v = b2 * *v + (one - b2) * *g * *g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
    }
}
