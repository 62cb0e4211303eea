//! Real scalar abstraction shared by every numeric routine in the crate.
//!
//! Everything is written against [`Real`], which is implemented for `f32`
//! and `f64`. Complex entries are always `Complex<T>` for some `T: Real`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// A real floating point type usable as the base field of the simulator.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Display + 'static
{
    /// Machine epsilon as `f64`.
    const EPSILON: f64;

    /// Converts an `f64` literal. Never fails for finite input.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;
}

impl Real for f32 {
    const EPSILON: f64 = f32::EPSILON as f64;
}

pub(crate) fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
