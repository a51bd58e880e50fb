//! Log-concavity predicates and stochastic orders.

use serde::{Deserialize, Serialize};

use super::Pmf;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderKind {
    Stochastic,
    LikelihoodRatio,
}

/// Ultra-log-concavity: `v P(v)² >= (v+1) P(v+1) P(v-1)` for every `v`,
/// up to a relative rounding slack.
pub fn ulc_check<T: Real>(p: &Pmf<T>) -> bool {
    let slack = T::lit(T::ORDER_SLACK);
    (1..=p.len()).all(|v| {
        let vf = T::from_usize_lossy(v);
        let lhs = vf * p.mass(v) * p.mass(v);
        let rhs = (vf + T::one()) * p.mass(v + 1) * p.mass(v - 1);
        lhs >= rhs - slack * lhs.max(rhs)
    })
}

/// Largest `c` such that `P` is `c`-log-concave on its stored support:
/// the infimum over `x < N` of `P(x)/P(x+1) − P(x−1)/P(x)`.
///
/// A single-point law has no constraint and yields `+∞`.
pub fn c_log_concavity<T: Real>(p: &Pmf<T>) -> Result<T> {
    if let Some(index) = p.probs().iter().position(|&v| v == T::zero()) {
        return Err(Error::InteriorZero { index });
    }
    let probs = p.probs();
    let mut c = T::infinity();
    for x in 0..p.support_end() {
        let back = if x == 0 {
            T::zero()
        } else {
            probs[x - 1] / probs[x]
        };
        let e = probs[x] / probs[x + 1] - back;
        c = c.min(e);
    }
    Ok(c)
}

fn is_interval<T: Real>(probs: &[T]) -> bool {
    let Some(first) = probs.iter().position(|&v| v > T::zero()) else {
        return false;
    };
    let last = probs.iter().rposition(|&v| v > T::zero()).unwrap_or(first);
    probs[first..=last].iter().all(|&v| v > T::zero())
}

/// Returns whether `q` is dominated by `p` in the given order (`q ≤ p`).
///
/// Stochastic: `F_p(x) <= F_q(x)` for every `x`. Likelihood ratio:
/// `p(x) q(y) <= p(y) q(x)` for all `x < y`, which makes `p/q`
/// nondecreasing on the common support and handles the support ends.
pub fn stochastic_order<T: Real>(p: &Pmf<T>, q: &Pmf<T>, kind: OrderKind) -> Result<bool> {
    match kind {
        OrderKind::Stochastic => {
            let slack = T::lit(T::NORM_SLACK);
            let n = p.len().max(q.len());
            let (mut fp, mut fq) = (T::zero(), T::zero());
            for x in 0..n {
                fp += p.mass(x);
                fq += q.mass(x);
                if fp > fq + slack {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        OrderKind::LikelihoodRatio => {
            if !is_interval(p.probs()) || !is_interval(q.probs()) {
                return Err(Error::IncomparableSupports);
            }
            let slack = T::lit(T::ORDER_SLACK);
            let n = p.len().max(q.len());
            for x in 0..n {
                for y in (x + 1)..n {
                    let lhs = p.mass(x) * q.mass(y);
                    let rhs = p.mass(y) * q.mass(x);
                    if lhs > rhs + slack * lhs.max(rhs) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}
