use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::Rng;

use super::gaussian;
use crate::scalar::Scalar;

/// 2-D convolution, stride 1, zero "same" padding, odd square kernel.
///
/// `weight` is (out_channels, in_channels * k * k) with rows laid out
/// channel-major then kernel row then kernel column.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d<T> {
    pub kernel: usize,
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Conv2d<T> {
    pub fn new<R: Rng>(in_channels: usize, out_channels: usize, kernel: usize, std: f64, rng: &mut R) -> Self {
        assert!(kernel % 2 == 1, "kernel must be odd");
        let n = in_channels * kernel * kernel;
        Conv2d {
            kernel,
            weight: Array2::from_shape_vec((out_channels, n), gaussian(rng, std, out_channels * n)).unwrap(),
            bias: Array1::zeros(out_channels),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Conv2d {
            kernel: self.kernel,
            weight: Array2::zeros(self.weight.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.ncols() / (self.kernel * self.kernel)
    }

    pub fn out_channels(&self) -> usize {
        self.weight.nrows()
    }

    fn im2col(&self, x: ArrayView3<T>) -> Array2<T> {
        let (c, h, w) = x.dim();
        let k = self.kernel;
        let pad = (k / 2) as isize;
        let mut cols = Array2::zeros((c * k * k, h * w));
        for ch in 0..c {
            for ky in 0..k {
                for kx in 0..k {
                    let row = (ch * k + ky) * k + kx;
                    let mut out = cols.row_mut(row);
                    let out = out.as_slice_mut().unwrap();
                    for y in 0..h {
                        let sy = y as isize + ky as isize - pad;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        for xx in 0..w {
                            let sx = xx as isize + kx as isize - pad;
                            if sx >= 0 && sx < w as isize {
                                out[y * w + xx] = x[[ch, sy as usize, sx as usize]];
                            }
                        }
                    }
                }
            }
        }
        cols
    }

    fn col2im(&self, cols: &Array2<T>, dims: (usize, usize, usize)) -> Array3<T> {
        let (c, h, w) = dims;
        let k = self.kernel;
        let pad = (k / 2) as isize;
        let mut x = Array3::zeros(dims);
        for ch in 0..c {
            for ky in 0..k {
                for kx in 0..k {
                    let row = cols.row((ch * k + ky) * k + kx);
                    for y in 0..h {
                        let sy = y as isize + ky as isize - pad;
                        if sy < 0 || sy >= h as isize {
                            continue;
                        }
                        for xx in 0..w {
                            let sx = xx as isize + kx as isize - pad;
                            if sx >= 0 && sx < w as isize {
                                let v = &mut x[[ch, sy as usize, sx as usize]];
                                *v = *v + row[y * w + xx];
                            }
                        }
                    }
                }
            }
        }
        x
    }

    /// Returns the output and the unfolded input needed by `backward`.
    pub fn forward(&self, x: ArrayView3<T>) -> (Array3<T>, Array2<T>) {
        let (_, h, w) = x.dim();
        let cols = self.im2col(x);
        let mut out = self.weight.dot(&cols);
        out += &self.bias.view().insert_axis(Axis(1));
        let out = out.into_shape_with_order((self.out_channels(), h, w)).unwrap();
        (out, cols)
    }

    /// Accumulates parameter gradients into `grad`; returns the input gradient
    /// when `input_dims` is given.
    pub fn backward(
        &self,
        cols: &Array2<T>,
        grad_out: &Array3<T>,
        grad: &mut Conv2d<T>,
        input_dims: Option<(usize, usize, usize)>,
    ) -> Option<Array3<T>> {
        let (m, h, w) = grad_out.dim();
        let g = grad_out.view().into_shape_with_order((m, h * w)).unwrap();
        general_mat_mul(T::one(), &g, &cols.t(), T::one(), &mut grad.weight);
        grad.bias += &g.sum_axis(Axis(1));
        input_dims.map(|dims| {
            let dcols = self.weight.t().dot(&g);
            self.col2im(&dcols, dims)
        })
    }
}

/// 1-D convolution over a (length, dim) sequence with "valid" windows.
/// `weight` is (filters, width * dim).
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1d<T> {
    pub width: usize,
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Conv1d<T> {
    pub fn new<R: Rng>(dim: usize, width: usize, filters: usize, std: f64, rng: &mut R) -> Self {
        Conv1d {
            width,
            weight: Array2::from_shape_vec((filters, width * dim), gaussian(rng, std, filters * width * dim)).unwrap(),
            bias: Array1::zeros(filters),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Conv1d {
            width: self.width,
            weight: Array2::zeros(self.weight.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }

    pub fn windows(&self, x: ArrayView2<T>) -> Array2<T> {
        let (len, dim) = x.dim();
        let n = len + 1 - self.width;
        let mut win = Array2::zeros((n, self.width * dim));
        for t in 0..n {
            let flat = x.slice(s![t..t + self.width, ..]);
            win.row_mut(t).assign(&flat.iter().copied().collect::<Array1<T>>());
        }
        win
    }

    /// Pre-activation outputs, (positions, filters), and the windows matrix.
    pub fn forward(&self, x: ArrayView2<T>) -> (Array2<T>, Array2<T>) {
        let win = self.windows(x);
        let mut z = win.dot(&self.weight.t());
        z += &self.bias;
        (z, win)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct nested-loop convolution.
    fn reference(conv: &Conv2d<f64>, x: &Array3<f64>) -> Array3<f64> {
        let (c, h, w) = x.dim();
        let k = conv.kernel as isize;
        let p = k / 2;
        let mut out = Array3::zeros((conv.out_channels(), h, w));
        for o in 0..conv.out_channels() {
            for y in 0..h as isize {
                for xx in 0..w as isize {
                    let mut acc = conv.bias[o];
                    for ch in 0..c {
                        for ky in 0..k {
                            for kx in 0..k {
                                let (sy, sx) = (y + ky - p, xx + kx - p);
                                if sy >= 0 && sy < h as isize && sx >= 0 && sx < w as isize {
                                    let wi = (ch * conv.kernel + ky as usize) * conv.kernel + kx as usize;
                                    acc += conv.weight[[o, wi]] * x[[ch, sy as usize, sx as usize]];
                                }
                            }
                        }
                    }
                    out[[o, y as usize, xx as usize]] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_direct_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut conv = Conv2d::<f64>::new(3, 4, 5, 1.0, &mut rng);
        conv.bias = Array1::from(vec![0.1, -0.2, 0.3, 0.0]);
        let x = Array3::from_shape_vec((3, 6, 7), gaussian(&mut rng, 1.0, 126)).unwrap();
        let (fast, _) = conv.forward(x.view());
        let slow = reference(&conv, &x);
        assert!(fast.iter().zip(slow.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn conv1d_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let conv = Conv1d::<f64>::new(2, 3, 1, 1.0, &mut rng);
        let x = Array2::from_shape_vec((4, 2), vec![1., 2., 3., 4., 5., 6., 7., 8.]).unwrap();
        let win = conv.windows(x.view());
        assert_eq!(win.dim(), (2, 6));
        assert_eq!(win.row(1).to_vec(), vec![3., 4., 5., 6., 7., 8.]);
        let (z, _) = conv.forward(x.view());
        let expected: f64 = conv.weight.row(0).iter().zip(win.row(0)).map(|(a, b)| a * b).sum();
        assert!((z[[0, 0]] - expected).abs() < 1e-12);
    }
}
