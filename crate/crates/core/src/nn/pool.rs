use ndarray::Array3;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MaxPool {
    pub size: usize,
    pub stride: usize,
}

impl MaxPool {
    /// Output side for "same" padding: ceil(input / stride).
    pub fn output_len(&self, input: usize) -> usize {
        input.div_ceil(self.stride)
    }

    /// Leading padding; the window start of output `i` is `i * stride - pad`.
    fn pad_before(&self, input: usize) -> usize {
        let out = self.output_len(input);
        ((out - 1) * self.stride + self.size).saturating_sub(input) / 2
    }
}

/// Max pooling with "same" padding. Padded positions never win. Returns the
/// output and, per output element, the flat input index that produced it.
pub fn max_pool_same<T: Scalar>(x: &Array3<T>, pool: MaxPool) -> (Array3<T>, Vec<usize>) {
    let (c, h, w) = x.dim();
    let (oh, ow) = (pool.output_len(h), pool.output_len(w));
    let (py, px) = (pool.pad_before(h) as isize, pool.pad_before(w) as isize);
    let src = x.as_slice().expect("standard layout");
    let mut out = Array3::zeros((c, oh, ow));
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            let y0 = (oy * pool.stride) as isize - py;
            let ys = y0.max(0) as usize..((y0 + pool.size as isize).min(h as isize)) as usize;
            for ox in 0..ow {
                let x0 = (ox * pool.stride) as isize - px;
                let xs = x0.max(0) as usize..((x0 + pool.size as isize).min(w as isize)) as usize;
                let mut best = usize::MAX;
                let mut best_v = T::neg_infinity();
                for y in ys.clone() {
                    for xx in xs.clone() {
                        let i = (ch * h + y) * w + xx;
                        if src[i] > best_v || best == usize::MAX {
                            best = i;
                            best_v = src[i];
                        }
                    }
                }
                out[[ch, oy, ox]] = best_v;
                argmax.push(best);
            }
        }
    }
    (out, argmax)
}

pub fn max_pool_backward<T: Scalar>(grad_out: &Array3<T>, argmax: &[usize], input_dims: (usize, usize, usize)) -> Array3<T> {
    let mut grad = Array3::zeros(input_dims);
    let dst = grad.as_slice_mut().unwrap();
    for (g, &i) in grad_out.iter().zip(argmax) {
        dst[i] = dst[i] + *g;
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_padding_shapes() {
        let pool = MaxPool { size: 3, stride: 2 };
        assert_eq!(pool.output_len(32), 16);
        assert_eq!(pool.output_len(16), 8);
        assert_eq!(pool.output_len(5), 3);
        assert_eq!(pool.pad_before(32), 0);
        assert_eq!(pool.pad_before(5), 1);
    }

    #[test]
    fn picks_window_maxima() {
        let x = Array3::from_shape_vec((1, 4, 4), (0..16).map(|v| v as f64).collect()).unwrap();
        let (y, arg) = max_pool_same(&x, MaxPool { size: 3, stride: 2 });
        assert_eq!(y.into_raw_vec_and_offset().0, vec![10.0, 11.0, 14.0, 15.0]);
        assert_eq!(arg, vec![10, 11, 14, 15]);
        let g = max_pool_backward(&Array3::from_elem((1, 2, 2), 1.0), &arg, (1, 4, 4));
        assert_eq!(g.sum(), 4.0);
        assert_eq!(g[[0, 2, 2]], 1.0);
    }
}
