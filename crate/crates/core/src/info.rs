//! Scaled score, scaled Fisher information, Johnstone–MacGibbon information
//! and the Poisson approximation bounds built from them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::{relative_entropy, tv_distance, Family, Pmf, PmfKind};
use crate::real::Real;

/// Tail tolerance for Poisson reference laws.
pub const REFERENCE_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Serialize)]
pub struct ScoreProfile<T> {
    /// `ρ(x) = (x+1) P(x+1) / (λ P(x)) − 1` for `x = 0..=N`.
    pub rho: Vec<T>,
    pub lambda: T,
    /// `K(P) = λ Σ P ρ²`.
    pub k_value: T,
    /// `I(P)`, possibly `+∞`.
    pub johnstone: T,
}

impl<T: Real> ScoreProfile<T> {
    /// Whether `ρ` is nonincreasing up to `tol`.
    pub fn is_nonincreasing(&self, tol: T) -> bool {
        self.rho.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

fn positive_table<T: Real>(p: &Pmf<T>) -> Result<()> {
    match p.probs().iter().position(|&v| v == T::zero()) {
        Some(index) => Err(Error::InteriorZero { index }),
        None => Ok(()),
    }
}

/// Scaled score and the informations derived from it. The mass just past the
/// table is zero for exact laws and the analytic continuation for truncated
/// family laws.
pub fn scaled_score<T: Real>(p: &Pmf<T>) -> Result<ScoreProfile<T>> {
    let lambda = p.mean();
    if !(lambda > T::zero()) {
        return Err(Error::ZeroMean);
    }
    positive_table(p)?;
    let n = p.len();
    let rho: Vec<T> = (0..n)
        .map(|x| T::from_usize_lossy(x + 1) * p.mass_ext(x + 1) / (lambda * p.mass(x)) - T::one())
        .collect();
    let k_value = lambda
        * p.probs()
            .iter()
            .zip(&rho)
            .map(|(&px, &r)| px * r * r)
            .sum::<T>();
    Ok(ScoreProfile {
        rho,
        lambda,
        k_value,
        johnstone: johnstone_info(p),
    })
}

/// `K(P) = λ_P Σ P(x) ρ_P(x)²`.
pub fn scaled_fisher<T: Real>(p: &Pmf<T>) -> Result<T> {
    scaled_score(p).map(|s| s.k_value)
}

/// Extra analytic terms summed past the table for truncated family laws.
const JOHNSTONE_EXTRA_TERMS: usize = 400;

/// `I(P) = Σ_x P(x−1)²/P(x) − 1`.
///
/// Exact laws have `P(N+1) = 0 < P(N)` and so `I = +∞`. Truncated family laws
/// continue the sum with the analytic masses past the table; truncated laws
/// without a family sum over the table only, which is a lower bound.
pub fn johnstone_info<T: Real>(p: &Pmf<T>) -> T {
    let probs = p.probs();
    let mut acc = T::zero();
    for x in 1..probs.len() {
        let prev = probs[x - 1];
        if prev == T::zero() {
            continue;
        }
        if probs[x] == T::zero() {
            return T::infinity();
        }
        acc += prev * prev / probs[x];
    }
    match (p.kind(), p.family()) {
        (PmfKind::ExactFinite, _) => return T::infinity(),
        (PmfKind::TruncatedAnalytic, Some(fam)) => {
            let mut prev = probs[probs.len() - 1];
            for x in probs.len()..probs.len() + JOHNSTONE_EXTRA_TERMS {
                let r = match fam.successor_ratio(x - 1) {
                    Some(r) => r,
                    None => break,
                };
                let next = prev * r;
                if next == T::zero() {
                    if prev == T::zero() {
                        break;
                    }
                    return T::infinity();
                }
                let term = prev * prev / next;
                acc += term;
                if term <= acc * T::epsilon() * T::lit(1e-3) {
                    break;
                }
                prev = next;
            }
        }
        (PmfKind::TruncatedAnalytic, None) => {}
    }
    acc - T::one()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum FisherKind {
    ScaledK,
    JohnstoneI,
}

/// Right side minus left side of the subadditivity bound for the law of an
/// independent sum.
///
/// `ScaledK`: `(1/λ_S) Σ λ_i K(P_i) − K(P_S)`. `JohnstoneI` (two laws):
/// `(I(P) + I(Q))/4 − I(P ⋆ Q)`.
pub fn fisher_subadditivity_gap<T: Real>(ps: &[Pmf<T>], kind: FisherKind) -> Result<T> {
    let Some(first) = ps.first() else {
        return Err(Error::EmptySupport);
    };
    let total = ps[1..].iter().fold(first.clone(), |acc, p| acc.convolve(p));
    match kind {
        FisherKind::ScaledK => {
            let lambda_s = total.mean();
            if !(lambda_s > T::zero()) {
                return Err(Error::ZeroMean);
            }
            let mut rhs = T::zero();
            for p in ps {
                let l = p.mean();
                // A zero-mean summand is a point mass at zero and adds nothing.
                if l > T::zero() {
                    rhs += l * scaled_fisher(p)?;
                }
            }
            Ok(rhs / lambda_s - scaled_fisher(&total)?)
        }
        FisherKind::JohnstoneI => {
            if ps.len() != 2 {
                return Err(Error::BadParameter(format!(
                    "johnstone subadditivity takes 2 laws, got {}",
                    ps.len()
                )));
            }
            let (a, b) = (johnstone_info(&ps[0]), johnstone_info(&ps[1]));
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InfiniteInformation);
            }
            Ok((a + b) / T::lit(4.0) - johnstone_info(&total))
        }
    }
}

/// Poisson law with mean `lambda`, truncated at [`REFERENCE_TOL`].
pub fn poisson_reference<T: Real>(lambda: T) -> Result<Pmf<T>> {
    Pmf::from_family(Family::Poisson { lambda }, T::lit(REFERENCE_TOL))
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonApproxReport<T> {
    pub lambda: T,
    pub k: T,
    pub d_to_poisson: T,
    pub tv: T,
    pub pinsker_bound: T,
    /// `D ≤ K + 1e−10`.
    pub d_le_k: bool,
    /// `TV ≤ sqrt(D/2) + 1e−10`.
    pub tv_le_pinsker: bool,
    pub chain_ok: bool,
    /// Tail mass not represented in the tables.
    pub error_budget: T,
}

pub const CHAIN_SLACK: f64 = 1e-10;

/// `K`, `D(P ‖ Π_λ)`, `TV(P, Π_λ)` and `sqrt(D/2)` for `λ = λ_P`.
pub fn poisson_approx_report<T: Real>(p: &Pmf<T>) -> Result<PoissonApproxReport<T>> {
    let score = scaled_score(p)?;
    let pois = poisson_reference(score.lambda)?;
    let d = relative_entropy(p, &pois);
    let tv = tv_distance(p, &pois);
    let pinsker_bound = (d / T::lit(2.0)).max(T::zero()).sqrt();
    let slack = T::lit(CHAIN_SLACK);
    let d_le_k = d <= score.k_value + slack;
    let tv_le_pinsker = tv <= pinsker_bound + slack;
    Ok(PoissonApproxReport {
        lambda: score.lambda,
        k: score.k_value,
        d_to_poisson: d,
        tv,
        pinsker_bound,
        d_le_k,
        tv_le_pinsker,
        chain_ok: d_le_k && tv_le_pinsker,
        error_budget: p.tail_bound() + pois.tail_bound(),
    })
}

/// `λ²/(n(n−λ))`, the bound on `D(B_{n,λ/n} ‖ Π_λ)`.
pub fn binomial_poisson_bound<T: Real>(n: usize, lambda: T) -> T {
    let n = T::from_usize_lossy(n);
    lambda * lambda / (n * (n - lambda))
}
