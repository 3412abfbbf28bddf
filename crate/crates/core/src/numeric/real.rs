use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type for every numeric kernel in this crate: `f32` or `f64`.
///
/// The trait only bundles `num_traits` capabilities plus conversion helpers,
/// so downstream code can stay free of `R::from(...).unwrap()` noise. RNG use
/// is kept off the trait: stochastic code draws `f64` and converts with
/// [`Real::of`].
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal not representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    fn of_i32(n: i32) -> Self {
        Self::from_i32(n).expect("i32 not representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    fn two() -> Self {
        Self::of(2.0)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}
