use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Cross-channel local response normalization:
/// `y_c = x_c / (bias + alpha * sum_{|c'-c| <= radius} x_{c'}^2)^beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalResponseNorm {
    pub radius: usize,
    pub bias: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LocalResponseNorm {
    fn default() -> Self {
        LocalResponseNorm {
            radius: 4,
            bias: 1.0,
            alpha: 0.001 / 9.0,
            beta: 0.75,
        }
    }
}

impl LocalResponseNorm {
    /// Returns the output and the per-element denominator base needed by `backward`.
    pub fn forward<T: Scalar>(&self, x: &Array3<T>) -> (Array3<T>, Array3<T>) {
        let (c, h, w) = x.dim();
        let plane = h * w;
        let src = x.as_slice().expect("standard layout");
        let (bias, alpha, beta) = (T::lit(self.bias), T::lit(self.alpha), T::lit(self.beta));
        let mut scale = Array3::zeros((c, h, w));
        let mut out = Array3::zeros((c, h, w));
        {
            let sc = scale.as_slice_mut().unwrap();
            let o = out.as_slice_mut().unwrap();
            for p in 0..plane {
                for ch in 0..c {
                    let lo = ch.saturating_sub(self.radius);
                    let hi = (ch + self.radius).min(c - 1);
                    let mut sum = T::zero();
                    for k in lo..=hi {
                        let v = src[k * plane + p];
                        sum = sum + v * v;
                    }
                    let d = bias + alpha * sum;
                    sc[ch * plane + p] = d;
                    o[ch * plane + p] = src[ch * plane + p] * d.powf(-beta);
                }
            }
        }
        (out, scale)
    }

    pub fn backward<T: Scalar>(&self, x: &Array3<T>, scale: &Array3<T>, grad_out: &Array3<T>) -> Array3<T> {
        let (c, h, w) = x.dim();
        let plane = h * w;
        let (alpha, beta) = (T::lit(self.alpha), T::lit(self.beta));
        let two = T::lit(2.0);
        let xs = x.as_slice().unwrap();
        let ds = scale.as_slice().unwrap();
        let gs = grad_out.as_slice().unwrap();
        let mut grad = Array3::zeros((c, h, w));
        let gi = grad.as_slice_mut().unwrap();
        let mut t = vec![T::zero(); c];
        for p in 0..plane {
            for ch in 0..c {
                let i = ch * plane + p;
                t[ch] = gs[i] * xs[i] * ds[i].powf(-beta - T::one());
            }
            for j in 0..c {
                let i = j * plane + p;
                let lo = j.saturating_sub(self.radius);
                let hi = (j + self.radius).min(c - 1);
                let cross: T = t[lo..=hi].iter().copied().fold(T::zero(), |a, b| a + b);
                gi[i] = gs[i] * ds[i].powf(-beta) - two * alpha * beta * xs[i] * cross;
            }
        }
        grad
    }
}
