//! Poincaré constants, modified log-Sobolev functionals and orthogonal
//! polynomial families.

pub mod linalg;
mod lsi;
mod orthopoly;

use serde::Serialize;

pub use lsi::{
    bobkov_ledoux_gap, bobkov_ledoux_terms, lsi_terms, modified_lsi_gap, FunctionalTerms, LsiGap,
};
pub use orthopoly::{eval_poly, orthogonal_polys, OrthoFamily};

use crate::error::{Error, Result};
use crate::pmf::{c_log_concavity, Pmf, PmfKind};
use crate::real::Real;
use linalg::{generalized_top, Reduction, SymMatrix};

/// Which discrete derivative the energy form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DerivativeKind {
    /// `Δg(x) = g(x+1) − g(x)`.
    ForwardDelta,
    /// `∇_n g(x) = (1 − x/n) Δg(x) + (x/n) Δg(x−1)`.
    MixedNablaN { n: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareEstimate<T> {
    /// Largest ratio `var_P(g) / energy(g)`.
    pub constant: T,
    /// Optimal `g`, centered and scaled to unit variance.
    pub maximizer: Vec<T>,
    /// Mass missing from the table the estimate was computed on.
    pub truncation_note: T,
    pub derivative_kind: DerivativeKind,
    /// Relative residual of the eigenpair.
    pub residual: T,
}

fn residual_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e4))
}

/// `M(y, z) = F(min(y, z)) F̄(max(y, z))`: `var(g) = dᵀ M d` for `d = Δg`.
///
/// The product form (rather than `F̄(max) − F̄(y) F̄(z)`) keeps rows below the
/// first support point exactly zero.
fn variance_form<T: Real>(q: &[T], dim: usize) -> SymMatrix<T> {
    let mut cdf = vec![T::zero(); dim];
    let mut surv = vec![T::zero(); dim];
    let mut acc = T::zero();
    for y in 0..dim {
        acc += q[y];
        cdf[y] = acc;
    }
    acc = T::zero();
    for y in (0..dim).rev() {
        acc += q.get(y + 1).copied().unwrap_or(T::zero());
        surv[y] = acc;
    }
    SymMatrix::from_fn(dim, |i, j| cdf[i.min(j)] * surv[i.max(j)])
}

fn solve<T: Real>(
    q: &[T],
    m: SymMatrix<T>,
    e: SymMatrix<T>,
    kind: DerivativeKind,
    tail: T,
) -> Result<PoincareEstimate<T>> {
    let dim = m.n();
    let red = Reduction::new(&m, &e)?;
    if red.active.is_empty() {
        return Err(Error::DegenerateSupport);
    }
    let top = generalized_top(&red.m, &red.e)?;
    if !(top.residual <= residual_tol()) {
        return Err(Error::EigenNotConverged {
            residual: top.residual.to_f64_lossy(),
        });
    }
    let d = red.expand(&top.vector, dim);
    let mut g = Vec::with_capacity(dim + 1);
    g.push(T::zero());
    for &v in &d {
        g.push(*g.last().expect("nonempty") + v);
    }
    let mean: T = g.iter().zip(q).map(|(&a, &b)| a * b).sum();
    g.iter_mut().for_each(|v| *v -= mean);
    let var: T = g.iter().zip(q).map(|(&a, &b)| a * a * b).sum();
    let sign = if g
        .iter()
        .zip(q)
        .enumerate()
        .map(|(x, (&a, &b))| a * b * T::from_usize_lossy(x))
        .sum::<T>()
        < T::zero()
    {
        -T::one()
    } else {
        T::one()
    };
    let scale = sign / var.sqrt();
    g.iter_mut().for_each(|v| *v *= scale);
    Ok(PoincareEstimate {
        constant: top.value,
        maximizer: g,
        truncation_note: tail,
        derivative_kind: kind,
        residual: top.residual,
    })
}

/// Largest `var_P(g) / Σ_{x<N} P(x) (Δg(x))²` over nonconstant `g` on `{0..N}`,
/// evaluated on the stored table renormalized to unit mass.
pub fn poincare_constant<T: Real>(p: &Pmf<T>) -> Result<PoincareEstimate<T>> {
    if p.support_end() == 0 {
        return Err(Error::DegenerateSupport);
    }
    let q = p.normalized().probs().to_vec();
    let dim = q.len() - 1;
    let m = variance_form(&q, dim);
    let e = SymMatrix::from_fn(dim, |i, j| if i == j { q[i] } else { T::zero() });
    solve(&q, m, e, DerivativeKind::ForwardDelta, p.tail_bound())
}

/// Poincaré constant for the mixed derivative `∇_n` on `{0..n}`.
pub fn poincare_constant_mixed<T: Real>(p: &Pmf<T>, n: usize) -> Result<PoincareEstimate<T>> {
    if p.support_end() > n {
        return Err(Error::SupportExceedsN {
            support_end: p.support_end(),
            n,
        });
    }
    if p.support_end() == 0 {
        return Err(Error::DegenerateSupport);
    }
    let mut q = p.normalized().probs().to_vec();
    q.resize(n + 1, T::zero());
    let m = variance_form(&q, n);
    let mut e = SymMatrix::zeros(n);
    let nf = T::from_usize_lossy(n);
    for (x, &w) in q.iter().enumerate() {
        if w == T::zero() {
            continue;
        }
        let xf = T::from_usize_lossy(x);
        // ∇_n g(x) = a d(x) + b d(x−1)
        let mut terms = Vec::with_capacity(2);
        if x < n {
            terms.push((x, T::one() - xf / nf));
        }
        if x >= 1 {
            terms.push((x - 1, xf / nf));
        }
        for &(i, a) in &terms {
            for &(j, b) in &terms {
                if j <= i {
                    let v = e.get(i, j) + w * a * b;
                    e.set(i, j, v);
                }
            }
        }
    }
    solve(&q, m, e, DerivativeKind::MixedNablaN { n }, p.tail_bound())
}

#[derive(Debug, Clone, Serialize)]
pub struct ClcPoincare<T> {
    pub c: T,
    pub bound: T,
    pub estimate: PoincareEstimate<T>,
    pub satisfied: bool,
}

pub const CLC_SLACK: f64 = 1e-6;

/// Requires a truncation of a family supported on all of `ℤ₊` with positive `c`.
pub(crate) fn full_support_c<T: Real>(p: &Pmf<T>) -> Result<T> {
    let full =
        p.kind() == PmfKind::TruncatedAnalytic && p.family().is_some_and(|f| f.has_full_support());
    if !full {
        return Err(Error::NotCLogConcave(
            "support is not all of the nonnegative integers".into(),
        ));
    }
    let c = c_log_concavity(p)?;
    if !(c > T::zero()) {
        return Err(Error::NotCLogConcave(format!("c = {c}")));
    }
    Ok(c)
}

/// Compares the Poincaré constant with `1/c`.
pub fn poincare_bound_clc<T: Real>(p: &Pmf<T>) -> Result<ClcPoincare<T>> {
    let c = full_support_c(p)?;
    let estimate = poincare_constant(p)?;
    let bound = T::one() / c;
    let satisfied = estimate.constant <= bound + T::lit(CLC_SLACK);
    Ok(ClcPoincare {
        c,
        bound,
        estimate,
        satisfied,
    })
}
