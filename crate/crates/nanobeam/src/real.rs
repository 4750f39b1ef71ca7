//! Scalar abstraction for the numeric core.
//!
//! Everything downstream of the beam model is written against [`Real`] so the
//! same code runs in `f32` or `f64`. `f64` is the supported precision for
//! production runs (shell energies down to 1e-9 sit on potential coefficients
//! of order 1e-3); the crate root exports `f64` aliases for all domain types.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for converting an `f64` literal into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// Widens to `f64` (lossless for both supported scalars).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must widen to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
