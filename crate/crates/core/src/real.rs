//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Besides the arithmetic bounds, each implementation carries the rounding
/// slacks that the structural checks use, so a single-precision build does
/// not inherit double-precision thresholds it can never meet.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Allowed excess of total mass over one.
    const NORM_SLACK: f64;
    /// Relative slack in the ultra-log-concavity and likelihood-ratio tests.
    const ORDER_SLACK: f64;
    /// Default certified tail tolerance for infinite-support families.
    const DEFAULT_TRUNC_TOL: f64;
    /// Convergence threshold for the Jacobi eigen-sweep (relative off-diagonal norm).
    const EIGEN_TOL: f64;

    /// Converts an `f64` literal, panicking only for values the type cannot represent.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// `x ln x` with the convention `0 ln 0 = 0`.
    #[inline]
    fn xlogx(self) -> Self {
        if self <= Self::zero() {
            Self::zero()
        } else {
            self * self.ln()
        }
    }
}

impl Real for f64 {
    const NORM_SLACK: f64 = 1e-12;
    const ORDER_SLACK: f64 = 1e-14;
    const DEFAULT_TRUNC_TOL: f64 = 1e-12;
    const EIGEN_TOL: f64 = 1e-15;
}

impl Real for f32 {
    const NORM_SLACK: f64 = 1e-5;
    const ORDER_SLACK: f64 = 1e-5;
    const DEFAULT_TRUNC_TOL: f64 = 1e-6;
    const EIGEN_TOL: f64 = 1e-7;
}
