use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;

use super::gaussian;
use crate::scalar::Scalar;

/// Fully connected layer, `y = W x + b` with `W` of shape (out, in).
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn new<R: Rng>(inputs: usize, outputs: usize, std: f64, rng: &mut R) -> Self {
        Dense {
            weight: Array2::from_shape_vec((outputs, inputs), gaussian(rng, std, inputs * outputs)).unwrap(),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Dense {
            weight: Array2::zeros(self.weight.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }

    pub fn forward(&self, x: ArrayView1<T>) -> Array1<T> {
        self.weight.dot(&x) + &self.bias
    }

    pub fn backward(&self, x: ArrayView1<T>, grad_out: ArrayView1<T>, grad: &mut Dense<T>) -> Array1<T> {
        let g2 = grad_out.insert_axis(Axis(1));
        let x2 = x.insert_axis(Axis(0));
        ndarray::linalg::general_mat_mul(T::one(), &g2, &x2, T::one(), &mut grad.weight);
        grad.bias += &grad_out;
        self.weight.t().dot(&grad_out)
    }
}
