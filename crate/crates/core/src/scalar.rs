//! Scalar abstraction so the numeric core runs on f32 or f64.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the numeric core.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + ToPrimitive + Sum<Self> + Display + LowerExp + Debug + 'static
{
    /// Conversion from f64 literals and file/config values.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize conversion")
    }
}

impl<T> Scalar for T where
    T: Float + NumAssign + FromPrimitive + ToPrimitive + Sum<T> + Display + LowerExp + Debug + 'static
{
}

/// Elementwise logistic function, bounded in (0,1).
pub fn sigmoid<F: Scalar>(xs: &[F]) -> Vec<F> {
    xs.iter().map(|&x| sigmoid_scalar(x)).collect()
}

pub fn sigmoid_scalar<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}
