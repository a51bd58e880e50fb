//! Probability mass functions on `{0, 1, ..., N}` with a certified tail budget.

mod family;
mod measures;
mod order;

pub use family::{bernoulli_sum_dp, Family, FamilyTag, DEFAULT_SUPPORT_CAP};
pub use measures::{ent_functional, entropy, relative_entropy, tv_distance};
pub use order::{c_log_concavity, stochastic_order, ulc_check, OrderKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Whether the stored table is the whole law or a truncation of an analytic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfKind {
    ExactFinite,
    TruncatedAnalytic,
}

/// A validated mass function.
///
/// `probs[x]` is the mass at `x`; anything past the last stored entry is
/// bounded in total by `tail_bound`. The last stored entry is nonzero unless
/// the law is the point mass at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PmfRepr<T>",
    into = "PmfRepr<T>",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct Pmf<T: Real> {
    probs: Vec<T>,
    tail_bound: T,
    kind: PmfKind,
    family: Option<Family<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PmfRepr<T> {
    probs: Vec<T>,
    tail_bound: T,
    kind: PmfKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<FamilyTag<T>>,
}

impl<T: Real> From<Pmf<T>> for PmfRepr<T> {
    fn from(p: Pmf<T>) -> Self {
        PmfRepr {
            probs: p.probs,
            tail_bound: p.tail_bound,
            kind: p.kind,
            family: p.family.map(Into::into),
        }
    }
}

impl<T: Real> TryFrom<PmfRepr<T>> for Pmf<T> {
    type Error = String;

    fn try_from(r: PmfRepr<T>) -> std::result::Result<Self, String> {
        let family = r
            .family
            .map(Family::try_from)
            .transpose()
            .map_err(|e| format!("field `family`: {e}"))?;
        let pmf = Pmf::new(r.probs, r.tail_bound).map_err(|e| match e {
            Error::NotNormalized { .. }
            | Error::NegativeMass { .. }
            | Error::NonFinite { .. }
            | Error::EmptySupport => {
                format!("field `probs`: {e}")
            }
            other => format!("field `tail_bound`: {other}"),
        })?;
        if pmf.kind != r.kind {
            return Err(format!(
                "field `kind`: {:?} is inconsistent with tail_bound {}",
                r.kind, pmf.tail_bound
            ));
        }
        Ok(Pmf { family, ..pmf })
    }
}

fn trim<T: Real>(mut probs: Vec<T>) -> Vec<T> {
    while probs.len() > 1 && probs[probs.len() - 1] == T::zero() {
        probs.pop();
    }
    if probs.is_empty() {
        probs.push(T::one());
    }
    probs
}

impl<T: Real> Pmf<T> {
    /// Validates `weights` as a mass function whose omitted tail is at most `tail_bound`.
    pub fn new(weights: Vec<T>, tail_bound: T) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySupport);
        }
        if !(tail_bound.is_finite() && tail_bound >= T::zero() && tail_bound < T::one()) {
            return Err(Error::BadParameter(format!(
                "tail_bound = {tail_bound} must lie in [0, 1)"
            )));
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if w < T::zero() {
                return Err(Error::NegativeMass {
                    index,
                    value: w.to_f64_lossy(),
                });
            }
        }
        let sum: T = weights.iter().copied().sum();
        let slack = T::lit(T::NORM_SLACK);
        let lo = T::one() - tail_bound - slack;
        let hi = T::one() + slack;
        if !(sum >= lo && sum <= hi) {
            return Err(Error::NotNormalized {
                sum: sum.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        Ok(Self::from_parts(weights, tail_bound, None))
    }

    /// Exact law with no omitted tail.
    pub fn exact(weights: Vec<T>) -> Result<Self> {
        Self::new(weights, T::zero())
    }

    /// Point mass at `k`.
    pub fn point(k: usize) -> Self {
        let mut probs = vec![T::zero(); k + 1];
        probs[k] = T::one();
        Self::from_parts(probs, T::zero(), None)
    }

    /// Tabulates a parametric family, truncating at certified tail `trunc_tol`.
    pub fn from_family(family: Family<T>, trunc_tol: T) -> Result<Self> {
        Self::from_family_capped(family, trunc_tol, DEFAULT_SUPPORT_CAP)
    }

    pub fn from_family_capped(family: Family<T>, trunc_tol: T, cap: usize) -> Result<Self> {
        let tab = family.tabulate(trunc_tol, cap)?;
        Ok(Self::from_parts(tab.probs, tab.tail_bound, Some(family)))
    }

    pub fn poisson(lambda: T) -> Result<Self> {
        Self::from_family(Family::Poisson { lambda }, T::lit(T::DEFAULT_TRUNC_TOL))
    }

    pub fn bernoulli(p: T) -> Result<Self> {
        Self::from_family(Family::Bernoulli { p }, T::lit(T::DEFAULT_TRUNC_TOL))
    }

    pub fn binomial(n: usize, p: T) -> Result<Self> {
        Self::from_family(Family::Binomial { n, p }, T::lit(T::DEFAULT_TRUNC_TOL))
    }

    /// Unvalidated constructor for results of exact operations on valid inputs.
    pub(crate) fn from_parts(probs: Vec<T>, tail_bound: T, family: Option<Family<T>>) -> Self {
        let probs = trim(probs);
        let kind = if tail_bound > T::zero() {
            PmfKind::TruncatedAnalytic
        } else {
            PmfKind::ExactFinite
        };
        Self {
            probs,
            tail_bound,
            kind,
            family,
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn kind(&self) -> PmfKind {
        self.kind
    }

    pub fn family(&self) -> Option<&Family<T>> {
        self.family.as_ref()
    }

    /// Largest stored point `N`.
    pub fn support_end(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Stored mass at `x`, zero past the table.
    pub fn mass(&self, x: usize) -> T {
        self.probs.get(x).copied().unwrap_or_else(T::zero)
    }

    /// Mass at `x`, continuing past the table with the family's analytic
    /// successor ratios when the law is a truncation of a known family.
    pub fn mass_ext(&self, x: usize) -> T {
        if x < self.probs.len() {
            return self.probs[x];
        }
        if self.kind != PmfKind::TruncatedAnalytic {
            return T::zero();
        }
        let Some(fam) = &self.family else {
            return T::zero();
        };
        let mut m = self.probs[self.support_end()];
        for y in self.support_end()..x {
            match fam.successor_ratio(y) {
                Some(r) => m *= r,
                None => return T::zero(),
            }
        }
        m
    }

    pub fn total_mass(&self) -> T {
        self.probs.iter().copied().sum()
    }

    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(x, &p)| T::from_usize_lossy(x) * p)
            .sum()
    }

    pub fn variance(&self) -> T {
        self.moments().1
    }

    /// `(mean, variance)` by direct summation.
    pub fn moments(&self) -> (T, T) {
        let mean = self.mean();
        let var = self
            .probs
            .iter()
            .enumerate()
            .map(|(x, &p)| {
                let d = T::from_usize_lossy(x) - mean;
                d * d * p
            })
            .sum();
        (mean, var)
    }

    /// Survival function `F̄(y) = Σ_{x>y} P(x)` for `y = 0..N`.
    pub fn survival(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.probs.len()];
        let mut acc = T::zero();
        for y in (0..self.probs.len()).rev() {
            out[y] = acc;
            acc += self.probs[y];
        }
        out
    }

    /// Cumulative distribution `F(y) = Σ_{x<=y} P(x)`.
    pub fn cdf(&self) -> Vec<T> {
        let mut acc = T::zero();
        self.probs
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect()
    }

    /// Copy with the stored mass rescaled to one. The tail budget is kept.
    pub fn normalized(&self) -> Self {
        let s = self.total_mass();
        Self {
            probs: self.probs.iter().map(|&p| p / s).collect(),
            ..self.clone()
        }
    }

    /// Discrete convolution, the law of an independent sum.
    pub fn convolve(&self, other: &Pmf<T>) -> Pmf<T> {
        let mut out = vec![T::zero(); self.len() + other.len() - 1];
        for (i, &a) in self.probs.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            for (j, &b) in other.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let family = match (&self.family, &other.family) {
            (Some(Family::Poisson { lambda: a }), Some(Family::Poisson { lambda: b })) => {
                Some(Family::Poisson { lambda: *a + *b })
            }
            (
                Some(Family::NegativeBinomial { r: r1, p: p1 }),
                Some(Family::NegativeBinomial { r: r2, p: p2 }),
            ) if p1 == p2 => Some(Family::NegativeBinomial {
                r: *r1 + *r2,
                p: *p1,
            }),
            (Some(a), Some(b)) => match (bernoulli_params(a), bernoulli_params(b)) {
                (Some(mut x), Some(y)) => {
                    x.extend(y);
                    Some(Family::BernoulliSum { ps: x })
                }
                _ => None,
            },
            _ => None,
        };
        Pmf::from_parts(out, self.tail_bound + other.tail_bound, family)
    }

    /// Size-biased law `P*(x) = (x+1) P(x+1) / λ_P`.
    pub fn size_bias(&self) -> Result<Pmf<T>> {
        let lambda = self.mean();
        if !(lambda > T::zero()) {
            return Err(Error::ZeroMean);
        }
        let probs: Vec<T> = (0..self.support_end())
            .map(|x| T::from_usize_lossy(x + 1) * self.probs[x + 1] / lambda)
            .collect();
        let family = self.family.as_ref().and_then(size_biased_family);
        let tail_bound = if self.tail_bound == T::zero() {
            T::zero()
        } else {
            let n = self.support_end();
            self.family
                .as_ref()
                .and_then(|f| f.tail_bounds_after(n, self.mass_ext(n + 1)))
                .map(|(_, moment)| moment / lambda)
                .unwrap_or(self.tail_bound)
        };
        Ok(Pmf::from_parts(probs, tail_bound, family))
    }
}

fn bernoulli_params<T: Real>(f: &Family<T>) -> Option<Vec<T>> {
    match f {
        Family::Bernoulli { p } => Some(vec![*p]),
        Family::Binomial { n, p } => Some(vec![*p; *n]),
        Family::BernoulliSum { ps } => Some(ps.clone()),
        _ => None,
    }
}

fn size_biased_family<T: Real>(f: &Family<T>) -> Option<Family<T>> {
    match f {
        Family::Poisson { lambda } => Some(Family::Poisson { lambda: *lambda }),
        Family::Binomial { n, p } if *n >= 2 => Some(Family::Binomial { n: n - 1, p: *p }),
        Family::Geometric { p } => Some(Family::NegativeBinomial {
            r: T::lit(2.0),
            p: *p,
        }),
        Family::NegativeBinomial { r, p } => Some(Family::NegativeBinomial {
            r: *r + T::one(),
            p: *p,
        }),
        Family::TiltedPoisson { lambda, beta } => Some(Family::TiltedPoisson {
            lambda: *lambda * (-T::lit(2.0) * *beta).exp(),
            beta: *beta,
        }),
        _ => None,
    }
}

/// Free-function form of [`Pmf::new`].
pub fn make_pmf<T: Real>(weights: Vec<T>, tail_bound: T) -> Result<Pmf<T>> {
    Pmf::new(weights, tail_bound)
}

/// Free-function form of [`Pmf::from_family`].
pub fn family_pmf<T: Real>(family: Family<T>, trunc_tol: T) -> Result<Pmf<T>> {
    Pmf::from_family(family, trunc_tol)
}

pub fn convolve<T: Real>(p: &Pmf<T>, q: &Pmf<T>) -> Pmf<T> {
    p.convolve(q)
}

pub fn size_bias<T: Real>(p: &Pmf<T>) -> Result<Pmf<T>> {
    p.size_bias()
}

pub fn moments<T: Real>(p: &Pmf<T>) -> (T, T) {
    p.moments()
}
