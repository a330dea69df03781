use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar used by the analytic parts of the crate.
///
/// Implemented for `f32` and `f64`. Tolerances quoted in the docs assume
/// `f64`; `f32` instantiations are correct up to single-precision rounding.
pub trait Real:
    Float + FloatConst + FromPrimitive + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
