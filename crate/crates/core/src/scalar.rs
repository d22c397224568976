//! Floating-point abstraction for the numeric kernels.
//!
//! Everything numeric in this crate (feature weighting, classifier training,
//! probability rows, metrics) is generic over [`Scalar`], so the same code
//! runs in `f32` or `f64`. The file formats and the CLI use the `f64`
//! aliases exported from the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Lossy cast from `f64`, for constants and tolerances.
#[inline]
pub fn from_f64<F: Scalar>(v: f64) -> F {
    F::from_f64(v).expect("f64 constant representable in scalar type")
}

/// Cast from `usize`, for counts entering a numeric formula.
#[inline]
pub fn from_usize<F: Scalar>(n: usize) -> F {
    F::from_usize(n).expect("usize count representable in scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn casts_round_trip_small_values() {
        assert_eq!(from_f64::<f64>(0.25), 0.25);
        assert_eq!(from_f64::<f32>(0.25), 0.25f32);
        assert_eq!(from_usize::<f64>(21), 21.0);
    }
}
