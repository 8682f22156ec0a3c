//! Scalar and coefficient traits shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// Floating point type the engine computes in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every `Scalar` can represent (a rounding of) any finite `f64`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Coefficient type of torsion components: floats or exact rationals.
pub trait Coefficient:
    Num + Copy + Neg<Output = Self> + PartialEq + Debug + Send + Sync + 'static
{
    fn to_scalar<S: Scalar>(self) -> S;
    fn from_i64(v: i64) -> Self;
}

impl Coefficient for f64 {
    fn to_scalar<S: Scalar>(self) -> S {
        S::lit(self)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Coefficient for f32 {
    fn to_scalar<S: Scalar>(self) -> S {
        S::lit(self as f64)
    }
    fn from_i64(v: i64) -> Self {
        v as f32
    }
}

impl Coefficient for Ratio<i64> {
    fn to_scalar<S: Scalar>(self) -> S {
        let n = S::lit(*self.numer() as f64);
        let d = S::lit(*self.denom() as f64);
        n / d
    }
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }
}
