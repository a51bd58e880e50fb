//! Entropy, Fisher information and concentration functionals for probability
//! mass functions on the non-negative integers, together with Rényi thinning,
//! the thinning/Poisson interpolation path, and randomized inequality suites.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The `*64`
//! aliases below fix the scalar to `f64`, which is what the harness and CLI use.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
mod error;
pub mod harness;
pub mod info;
pub mod monotonicity;
pub mod pmf;
mod real;
pub mod sample;
pub mod shepp_olkin;
pub mod thinning;

pub use error::{Error, Result};
pub use pmf::{Family, OrderKind, Pmf, PmfKind};
pub use real::Real;

pub type Pmf64 = Pmf<f64>;
pub type Pmf32 = Pmf<f32>;
pub type Family64 = Family<f64>;
pub type PathSpec64 = shepp_olkin::PathSpec<f64>;
pub type PoincareEstimate64 = concentration::PoincareEstimate<f64>;
pub type PoissonApproxReport64 = info::PoissonApproxReport<f64>;
pub type MaxentGap64 = monotonicity::MaxentGap<f64>;
