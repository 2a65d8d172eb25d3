//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point type the estimators are generic over.
///
/// `RealField` supplies the transcendental functions and the linear algebra
/// (eigendecompositions) while `FromPrimitive`/`ToPrimitive` carry constants
/// in and diagnostics out. Implemented for `f32` and `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every literal used by the crate is
    /// representable (possibly rounded) in both supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    #[inline]
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl<T> Real for T where
    T: RealField
        + Copy
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Sum of squares of a slice.
#[inline]
pub(crate) fn norm_sq<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
