//! Entropy, divergence and distance functionals (natural logarithms throughout).

use super::Pmf;
use crate::error::{Error, Result};
use crate::real::Real;

/// Shannon entropy `-Σ P log P` in nats.
pub fn entropy<T: Real>(p: &Pmf<T>) -> T {
    -p.probs().iter().map(|&v| v.xlogx()).sum::<T>()
}

/// `D(Q ‖ P) = Σ Q log(Q/P)`; `+∞` when `Q` charges a point `P` does not.
///
/// Points past `P`'s table are evaluated with the analytic extension when `P`
/// is a truncated family, so a truncated Poisson reference never produces a
/// spurious infinity.
pub fn relative_entropy<T: Real>(q: &Pmf<T>, p: &Pmf<T>) -> T {
    let mut acc = T::zero();
    for (x, &qx) in q.probs().iter().enumerate() {
        if qx == T::zero() {
            continue;
        }
        let px = p.mass_ext(x);
        if px == T::zero() {
            return T::infinity();
        }
        acc += qx * (qx / px).ln();
    }
    acc
}

/// `Ent_P(f) = Σ P f log f − (Σ P f) log(Σ P f)`.
///
/// `f[x]` must be given for every stored point of `P` and be positive wherever `P` is.
pub fn ent_functional<T: Real>(p: &Pmf<T>, f: &[T]) -> Result<T> {
    if f.len() < p.len() {
        return Err(Error::FunctionTooShort {
            got: f.len(),
            need: p.len(),
        });
    }
    let mut mean = T::zero();
    let mut first = T::zero();
    for (x, &px) in p.probs().iter().enumerate() {
        if px == T::zero() {
            continue;
        }
        let fx = f[x];
        if !(fx > T::zero()) || !fx.is_finite() {
            return Err(Error::NonPositiveF { index: x });
        }
        mean += px * fx;
        first += px * fx.xlogx();
    }
    Ok(first - mean.xlogx())
}

/// Total variation in the half-ℓ₁ convention, inflated by half the combined
/// tail budgets so it bounds the distance between the untruncated laws.
pub fn tv_distance<T: Real>(p: &Pmf<T>, q: &Pmf<T>) -> T {
    let n = p.len().max(q.len());
    let l1: T = (0..n).map(|x| (p.mass(x) - q.mass(x)).abs()).sum();
    let half = T::lit(0.5);
    let tv = half * l1 + half * (p.tail_bound() + q.tail_bound());
    tv.max(T::zero()).min(T::one())
}
