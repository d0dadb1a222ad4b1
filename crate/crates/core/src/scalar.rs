//! Floating-point scalar abstraction shared by every network in the crate.
//!
//! Training runs in `f32`; gradient checks and reference computations run the
//! same code in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Tag stored in model artifacts.
    const NAME: &'static str;
    /// Width of one little-endian encoded value.
    const BYTES: usize;

    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
    const BYTES: usize = 4;

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes[..4].try_into().expect("4 bytes"))
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
    const BYTES: usize = 8;

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn le_roundtrip_is_bitwise() {
        for v in [0.0f32, -0.0, 1.5, f32::MIN_POSITIVE, 3.402_823e38] {
            let mut buf = Vec::new();
            v.write_le(&mut buf);
            assert_eq!(f32::read_le(&buf).to_bits(), v.to_bits());
        }
        let mut buf = Vec::new();
        std::f64::consts::PI.write_le(&mut buf);
        assert_eq!(buf.len(), f64::BYTES);
        assert_eq!(f64::read_le(&buf), std::f64::consts::PI);
    }
}
