//! Floating-point abstraction so the whole model can be instantiated at
//! `f32` or `f64`. All bundled data and tolerances are written as `f64`
//! and converted on entry.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Scalar type the simulator is generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + 'static
{
    /// Convert an `f64` constant or configuration value.
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable in scalar type")
    }

    /// Widen to `f64` (lossless for the supported types).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
