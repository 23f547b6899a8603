//! Floating-point abstraction for the numeric core.
//!
//! All model, actor, and reward math is written against [`Scalar`] so the
//! same code runs in `f32` or `f64`. The crate root exports concrete type
//! aliases; `f64` is the reference precision (the acceptance tolerances in
//! the test suite assume it).

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the numeric core.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Name recorded in checkpoint manifests ("f32" or "f64").
    const DTYPE: &'static str;

    /// Converts from `f64`, preserving infinities; panics on NaN-free
    /// conversions that cannot be represented (never happens for f32/f64).
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 converts to scalar")
    }

    /// Widens to `f64` (exact for f32 and f64).
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Appends the little-endian byte representation to `out`.
    fn write_le(self, out: &mut Vec<u8>);

    /// Reads one value from a little-endian byte slice of exactly
    /// `size_of::<Self>()` bytes.
    fn read_le(bytes: &[u8]) -> Self;
}

impl Scalar for f32 {
    const DTYPE: &'static str = "f32";

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes per f32"))
    }
}

impl Scalar for f64 {
    const DTYPE: &'static str = "f64";

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes per f64"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f32::from_f64_lossy(1.5), 1.5f32);
        assert_eq!(f64::from_f64_lossy(f64::INFINITY), f64::INFINITY);
        assert_eq!(0.25f32.to_f64_lossy(), 0.25);
    }

    #[test]
    fn le_bytes_round_trip() {
        let mut buf = Vec::new();
        0.1f64.write_le(&mut buf);
        assert_eq!(buf.len(), 8);
        assert_eq!(f64::read_le(&buf), 0.1);

        let mut buf = Vec::new();
        (-3.5f32).write_le(&mut buf);
        assert_eq!(buf.len(), 4);
        assert_eq!(f32::read_le(&buf), -3.5);
    }
}
