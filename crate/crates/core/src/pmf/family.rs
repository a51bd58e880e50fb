//! Parametric families with analytic mass functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Hard cap on the support length of a truncated family.
pub const DEFAULT_SUPPORT_CAP: usize = 10_000;

/// A parametric law on the nonnegative integers.
///
/// Infinite-support members are described through the successor ratio
/// `P(x+1)/P(x)`, which is what both truncation and the analytic extension
/// beyond a stored support are built from.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    Poisson {
        lambda: T,
    },
    Bernoulli {
        p: T,
    },
    Binomial {
        n: usize,
        p: T,
    },
    /// `P(x) = p (1-p)^x` on `{0, 1, ...}`.
    Geometric {
        p: T,
    },
    /// `P(x) = Γ(x+r)/(Γ(r) x!) p^r (1-p)^x`, number of failures before the `r`-th success.
    NegativeBinomial {
        r: T,
        p: T,
    },
    BernoulliSum {
        ps: Vec<T>,
    },
    /// `P(x) ∝ λ^x e^{-β x²} / x!`.
    TiltedPoisson {
        lambda: T,
        beta: T,
    },
}

/// Serialized form: `{"name": ..., "params": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTag<T> {
    pub name: String,
    pub params: Vec<T>,
}

fn unit_interval<T: Real>(name: &str, p: T) -> Result<()> {
    if p.is_finite() && p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::BadParameter(format!(
            "{name} = {p} must lie in [0, 1]"
        )))
    }
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::BadParameter(format!(
            "{name} = {v} must be positive"
        )))
    }
}

impl<T: Real> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Poisson { .. } => "poisson",
            Family::Bernoulli { .. } => "bernoulli",
            Family::Binomial { .. } => "binomial",
            Family::Geometric { .. } => "geometric",
            Family::NegativeBinomial { .. } => "negative-binomial",
            Family::BernoulliSum { .. } => "bernoulli-sum",
            Family::TiltedPoisson { .. } => "tilted-poisson",
        }
    }

    pub fn params(&self) -> Vec<T> {
        match self {
            Family::Poisson { lambda } => vec![*lambda],
            Family::Bernoulli { p } | Family::Geometric { p } => vec![*p],
            Family::Binomial { n, p } => vec![T::from_usize_lossy(*n), *p],
            Family::NegativeBinomial { r, p } => vec![*r, *p],
            Family::BernoulliSum { ps } => ps.clone(),
            Family::TiltedPoisson { lambda, beta } => vec![*lambda, *beta],
        }
    }

    /// Builds a family from its name and flat parameter list, validating ranges.
    pub fn from_name_params(name: &str, params: &[T]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::BadParameter(format!(
                    "{name} takes {k} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let fam = match name {
            "poisson" => {
                want(1)?;
                Family::Poisson { lambda: params[0] }
            }
            "bernoulli" => {
                want(1)?;
                Family::Bernoulli { p: params[0] }
            }
            "binomial" => {
                want(2)?;
                let n = params[0];
                if !(n.is_finite() && n >= T::one() && n.fract() == T::zero()) {
                    return Err(Error::BadParameter(format!(
                        "binomial n = {n} must be a positive integer"
                    )));
                }
                Family::Binomial {
                    n: n.to_usize().unwrap_or(usize::MAX),
                    p: params[1],
                }
            }
            "geometric" => {
                want(1)?;
                Family::Geometric { p: params[0] }
            }
            "negative-binomial" => {
                want(2)?;
                Family::NegativeBinomial {
                    r: params[0],
                    p: params[1],
                }
            }
            "bernoulli-sum" => Family::BernoulliSum {
                ps: params.to_vec(),
            },
            "tilted-poisson" => {
                want(2)?;
                Family::TiltedPoisson {
                    lambda: params[0],
                    beta: params[1],
                }
            }
            other => return Err(Error::BadParameter(format!("unknown family `{other}`"))),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Family::Poisson { lambda } => positive("lambda", *lambda),
            Family::Bernoulli { p } => unit_interval("p", *p),
            Family::Binomial { n, p } => {
                if *n == 0 {
                    return Err(Error::BadParameter("binomial n must be at least 1".into()));
                }
                unit_interval("p", *p)
            }
            Family::Geometric { p } => {
                positive("p", *p)?;
                unit_interval("p", *p)
            }
            Family::NegativeBinomial { r, p } => {
                positive("r", *r)?;
                positive("p", *p)?;
                unit_interval("p", *p)
            }
            Family::BernoulliSum { ps } => {
                if ps.is_empty() {
                    return Err(Error::BadParameter(
                        "bernoulli-sum needs at least one p".into(),
                    ));
                }
                ps.iter().try_for_each(|&p| unit_interval("p", p))
            }
            Family::TiltedPoisson { lambda, beta } => {
                positive("lambda", *lambda)?;
                if beta.is_finite() && *beta >= T::zero() {
                    Ok(())
                } else {
                    Err(Error::BadParameter(format!(
                        "beta = {beta} must be nonnegative"
                    )))
                }
            }
        }
    }

    /// True when the family puts positive mass on every nonnegative integer.
    pub fn has_full_support(&self) -> bool {
        match self {
            Family::Poisson { .. } | Family::TiltedPoisson { .. } => true,
            Family::Geometric { p } | Family::NegativeBinomial { p, .. } => *p < T::one(),
            _ => false,
        }
    }

    /// `P(x+1)/P(x)` for infinite-support families, `None` otherwise.
    pub fn successor_ratio(&self, x: usize) -> Option<T> {
        let xf = T::from_usize_lossy(x);
        match self {
            Family::Poisson { lambda } => Some(*lambda / (xf + T::one())),
            Family::Geometric { p } => Some(T::one() - *p),
            Family::NegativeBinomial { r, p } => {
                Some((xf + *r) * (T::one() - *p) / (xf + T::one()))
            }
            Family::TiltedPoisson { lambda, beta } => {
                let two = T::lit(2.0);
                Some(*lambda * (-*beta * (two * xf + T::one())).exp() / (xf + T::one()))
            }
            _ => None,
        }
    }

    /// Upper bound on `successor_ratio(x)` over all `x >= from`.
    pub(crate) fn ratio_sup_from(&self, from: usize) -> Option<T> {
        match self {
            Family::NegativeBinomial { r, p } if *r < T::one() => Some(T::one() - *p),
            // Poisson, tilted Poisson and r >= 1 negative binomials have nonincreasing ratios.
            _ => self.successor_ratio(from),
        }
    }

    /// Certified bounds `(Σ_{x>n} P(x), Σ_{x>n} x P(x))` given the mass at `n + 1`.
    pub(crate) fn tail_bounds_after(&self, n: usize, mass_next: T) -> Option<(T, T)> {
        let rho = self.ratio_sup_from(n + 1)?;
        if rho >= T::one() {
            return None;
        }
        let one_minus = T::one() - rho;
        let start = T::from_usize_lossy(n + 1);
        let mass = mass_next / one_minus;
        let moment = mass_next * (start / one_minus + rho / (one_minus * one_minus));
        Some((mass, moment))
    }

    /// Mass at zero, for families where it has a closed form.
    fn mass_at_zero(&self) -> Option<T> {
        match self {
            Family::Poisson { lambda } => Some((-*lambda).exp()),
            Family::Geometric { p } => Some(*p),
            Family::NegativeBinomial { r, p } => Some(p.powf(*r)),
            _ => None,
        }
    }

    pub fn mean(&self) -> T {
        let one = T::one();
        match self {
            Family::Poisson { lambda } => *lambda,
            Family::Bernoulli { p } => *p,
            Family::Binomial { n, p } => T::from_usize_lossy(*n) * *p,
            Family::Geometric { p } => (one - *p) / *p,
            Family::NegativeBinomial { r, p } => *r * (one - *p) / *p,
            Family::BernoulliSum { ps } => ps.iter().copied().sum(),
            Family::TiltedPoisson { .. } => T::nan(),
        }
    }

    pub fn tag(&self) -> FamilyTag<T> {
        FamilyTag {
            name: self.name().to_string(),
            params: self.params(),
        }
    }
}

/// Output of [`Family::tabulate`].
pub(crate) struct Tabulated<T> {
    pub probs: Vec<T>,
    pub tail_bound: T,
}

/// Distribution of a sum of independent Bernoulli variables, by dynamic programming.
///
/// Parameters are not range-checked, so the same routine evaluates the
/// polynomial extension of the mass function outside `[0, 1]`.
pub fn bernoulli_sum_dp<T: Real>(ps: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(ps.len() + 1);
    out.push(T::one());
    for &p in ps {
        let q = T::one() - p;
        out.push(T::zero());
        for k in (1..out.len()).rev() {
            out[k] = out[k] * q + out[k - 1] * p;
        }
        out[0] *= q;
    }
    out
}

impl<T: Real> Family<T> {
    /// Tabulates the mass function, truncating infinite supports at the smallest
    /// end point whose certified tail is at most `trunc_tol`.
    pub(crate) fn tabulate(&self, trunc_tol: T, cap: usize) -> Result<Tabulated<T>> {
        self.validate()?;
        if !(trunc_tol > T::zero() && trunc_tol < T::one()) {
            return Err(Error::BadParameter(format!(
                "trunc_tol = {trunc_tol} must lie in (0, 1)"
            )));
        }
        let finite = |probs: Vec<T>| -> Result<Tabulated<T>> {
            if probs.len() > cap + 1 {
                return Err(Error::TruncationOverflow { cap });
            }
            Ok(Tabulated {
                probs,
                tail_bound: T::zero(),
            })
        };
        match self {
            Family::Bernoulli { p } => finite(vec![T::one() - *p, *p]),
            Family::Binomial { n, p } => {
                if *n > cap {
                    return Err(Error::TruncationOverflow { cap });
                }
                finite(bernoulli_sum_dp(&vec![*p; *n]))
            }
            Family::BernoulliSum { ps } => finite(bernoulli_sum_dp(ps)),
            Family::Geometric { p } if *p == T::one() => finite(vec![T::one()]),
            Family::NegativeBinomial { p, .. } if *p == T::one() => finite(vec![T::one()]),
            _ => self.tabulate_infinite(trunc_tol, cap),
        }
    }

    fn tabulate_infinite(&self, trunc_tol: T, cap: usize) -> Result<Tabulated<T>> {
        // Unnormalized weights for the tilted family, exact masses otherwise.
        let (w0, normalize) = match self.mass_at_zero() {
            Some(m) => (m, false),
            None => (T::one(), true),
        };
        if !(w0 > T::zero()) {
            return Err(Error::BadParameter(format!(
                "{} mass at zero underflows; parameters too large",
                self.name()
            )));
        }
        // Extend well past the truncation point so the tail estimate is an
        // explicit sum plus a negligible certified remainder.
        let fine = trunc_tol * T::lit(1e-6);
        let hard_limit = cap + 64;
        let mut w = vec![w0];
        let mut running = w0;
        loop {
            let x = w.len() - 1;
            let next = w[x] * self.successor_ratio(x).expect("infinite family");
            let rem = self.tail_bounds_after(x, next).map(|(m, _)| m);
            if let Some(rem) = rem {
                if rem <= fine * running && x >= 1 {
                    let mut probs = w;
                    let mut remainder = rem;
                    if normalize {
                        let z = probs.iter().rev().copied().sum::<T>() + remainder;
                        probs.iter_mut().for_each(|v| *v /= z);
                        remainder /= z;
                    }
                    // tail[n] = Σ_{x>n} P(x), accumulated from the smallest terms.
                    let last = probs.len() - 1;
                    let mut tail = remainder;
                    let mut end = last;
                    let mut tails = vec![T::zero(); probs.len()];
                    for n in (0..=last).rev() {
                        tails[n] = tail;
                        tail += probs[n];
                    }
                    for (n, &t) in tails.iter().enumerate() {
                        if t <= trunc_tol {
                            end = n;
                            break;
                        }
                    }
                    if end > cap {
                        return Err(Error::TruncationOverflow { cap });
                    }
                    let tail_bound = tails[end];
                    probs.truncate(end + 1);
                    return Ok(Tabulated { probs, tail_bound });
                }
            }
            if w.len() > hard_limit || !next.is_finite() {
                return Err(Error::TruncationOverflow { cap });
            }
            running += next;
            w.push(next);
        }
    }
}

impl<T: Real> From<Family<T>> for FamilyTag<T> {
    fn from(f: Family<T>) -> Self {
        f.tag()
    }
}

impl<T: Real> TryFrom<FamilyTag<T>> for Family<T> {
    type Error = Error;
    fn try_from(tag: FamilyTag<T>) -> Result<Self> {
        Family::from_name_params(&tag.name, &tag.params)
    }
}
