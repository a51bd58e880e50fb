//! Modified logarithmic Sobolev functionals.

use serde::Serialize;

use super::full_support_c;
use crate::error::{Error, Result};
use crate::pmf::{ent_functional, Family, Pmf};
use crate::real::Real;

/// Both sides of an entropy bound and their difference.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalTerms<T> {
    pub rhs: T,
    pub ent: T,
    /// `rhs − ent`; nonnegative when the bound holds.
    pub gap: T,
}

fn check_f<T: Real>(f: &[T], need: usize) -> Result<()> {
    if f.len() < need {
        return Err(Error::FunctionTooShort { got: f.len(), need });
    }
    match f[..need]
        .iter()
        .position(|&v| !(v > T::zero() && v.is_finite()))
    {
        Some(index) => Err(Error::NonPositiveF { index }),
        None => Ok(()),
    }
}

/// `constant · Σ_x P(x) f(x+1) (log(f(x+1)/f(x)) − 1 + f(x)/f(x+1))` against
/// `Ent_P(f)`, on the table renormalized to unit mass. `f` needs one point
/// past the table.
pub fn lsi_terms<T: Real>(p: &Pmf<T>, constant: T, f: &[T]) -> Result<FunctionalTerms<T>> {
    let q = p.normalized();
    check_f(f, q.len() + 1)?;
    let sum: T = q
        .probs()
        .iter()
        .enumerate()
        .map(|(x, &w)| {
            let u = f[x + 1] / f[x];
            // f(x+1)(log u − 1 + 1/u) = f(x)(u log u − u + 1)
            w * f[x] * (u * u.ln() - u + T::one())
        })
        .sum();
    let rhs = constant * sum;
    let ent = ent_functional(&q, f)?;
    Ok(FunctionalTerms {
        rhs,
        ent,
        gap: rhs - ent,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LsiGap<T> {
    pub gap: T,
    pub c: T,
    pub rhs: T,
    pub ent: T,
}

/// Gap in the modified log-Sobolev bound with constant `1/c` for a
/// `c`-log-concave law on all of `ℤ₊`.
pub fn modified_lsi_gap<T: Real>(p: &Pmf<T>, f: &[T]) -> Result<LsiGap<T>> {
    let c = full_support_c(p)?;
    let t = lsi_terms(p, T::one() / c, f)?;
    Ok(LsiGap {
        gap: t.gap,
        c,
        rhs: t.rhs,
        ent: t.ent,
    })
}

/// `λ Σ Π_λ(x) (f(x+1) − f(x))² / f(x)` against `Ent_{Π_λ}(f)`.
pub fn bobkov_ledoux_terms<T: Real>(
    lambda: T,
    f: &[T],
    trunc_tol: T,
) -> Result<FunctionalTerms<T>> {
    let pois = Pmf::from_family(Family::Poisson { lambda }, trunc_tol)?.normalized();
    check_f(f, pois.len() + 1)?;
    let sum: T = pois
        .probs()
        .iter()
        .enumerate()
        .map(|(x, &w)| {
            let d = f[x + 1] - f[x];
            w * d * d / f[x]
        })
        .sum();
    let rhs = lambda * sum;
    let ent = ent_functional(&pois, f)?;
    Ok(FunctionalTerms {
        rhs,
        ent,
        gap: rhs - ent,
    })
}

pub fn bobkov_ledoux_gap<T: Real>(lambda: T, f: &[T], trunc_tol: T) -> Result<T> {
    bobkov_ledoux_terms(lambda, f, trunc_tol).map(|t| t.gap)
}
