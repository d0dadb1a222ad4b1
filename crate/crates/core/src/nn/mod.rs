//! Layers with hand-written backward passes, generic over [`Scalar`].

mod conv;
mod dense;
mod lrn;
mod optim;
mod pool;

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub use conv::{Conv1d, Conv2d};
pub use dense::Dense;
pub use lrn::LocalResponseNorm;
pub use optim::{Optimizer, OptimizerKind};
pub use pool::{max_pool_backward, max_pool_same, MaxPool};

use crate::scalar::Scalar;

/// A bundle of trainable tensors that can be walked as flat slices.
///
/// Gradients are stored in a value of the same type, so optimizers and
/// gradient checks only need this view.
pub trait Parameters<T: Scalar>: Sized {
    fn param_slices(&self) -> Vec<(String, &[T])>;
    fn param_slices_mut(&mut self) -> Vec<&mut [T]>;

    /// Same shapes, all zeros.
    fn zeros_like(&self) -> Self;

    fn param_count(&self) -> usize {
        self.param_slices().iter().map(|(_, s)| s.len()).sum()
    }

    fn scale(&mut self, factor: T) {
        for s in self.param_slices_mut() {
            s.iter_mut().for_each(|v| *v = *v * factor);
        }
    }

    fn sq_norm(&self) -> T {
        self.param_slices()
            .iter()
            .flat_map(|(_, s)| s.iter())
            .fold(T::zero(), |acc, &v| acc + v * v)
    }

    fn all_finite(&self) -> bool {
        self.param_slices().iter().all(|(_, s)| s.iter().all(|v| v.is_finite()))
    }
}

pub(crate) fn gaussian<T: Scalar, R: Rng>(rng: &mut R, std: f64, n: usize) -> Vec<T> {
    let normal = Normal::new(0.0, std).expect("valid std");
    (0..n).map(|_| T::lit(normal.sample(rng))).collect()
}

pub fn relu_inplace<T: Scalar>(xs: &mut [T]) {
    for v in xs {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Zeroes gradient entries where the forward output was clamped.
pub fn relu_backward_inplace<T: Scalar>(output: &[T], grad: &mut [T]) {
    for (g, o) in grad.iter_mut().zip(output) {
        if *o <= T::zero() {
            *g = T::zero();
        }
    }
}

pub fn softmax<T: Scalar>(logits: ArrayView1<T>) -> Array1<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps = logits.mapv(|v| (v - max).exp());
    let sum = exps.sum();
    exps / sum
}

/// Softmax cross-entropy against a class index: returns (loss, d loss / d logits).
pub fn softmax_cross_entropy<T: Scalar>(logits: ArrayView1<T>, target: usize) -> (T, Array1<T>) {
    let probs = softmax(logits);
    let loss = -(probs[target].max(T::min_positive_value())).ln();
    let mut grad = probs;
    grad[target] = grad[target] - T::one();
    (loss, grad)
}
