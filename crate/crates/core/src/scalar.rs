use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type used for counts, probabilities and deviances.
///
/// Implemented for `f32` and `f64`. Integer counts are carried as reals so that
/// survey-weighted tables go through the same code paths.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    /// Lossy conversion from a count of things.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize is representable in every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `|a - b| <= rel * max(|a|, |b|)`, with exact equality always accepted.
pub(crate) fn rel_eq<T: Scalar>(a: T, b: T, rel: T) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_eq_handles_zero_and_scale() {
        assert!(rel_eq(0.0f64, 0.0, 1e-12));
        assert!(rel_eq(1e6f64, 1e6 + 1e-7, 1e-12));
        assert!(!rel_eq(1.0f64, 1.0 + 1e-9, 1e-12));
        assert!(rel_eq(1.0f32, 1.0, 1e-12));
    }
}
