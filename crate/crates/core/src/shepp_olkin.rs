//! Entropy of Bernoulli sums along affine parameter paths.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{bernoulli_sum_dp, Pmf};
use crate::real::Real;
use crate::sample::{random_path, trial_rng};

/// Interior second difference above which a profile counts as locally convex.
pub const WITNESS_THRESHOLD: f64 = 1e-7;
/// Grid used by the conjecture scans.
pub const SCAN_GRID: usize = 101;
/// Bracket searched by [`critical_q_search`].
pub const Q_BRACKET: (f64, f64) = (1.0, 6.0);
pub const Q_WIDTH: f64 = 0.05;

/// Affine path `p(t) = (1−t) p0 + t p1` of Bernoulli success probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSpec<T> {
    p0: Vec<T>,
    p1: Vec<T>,
    monotone: bool,
}

impl<T: Real> PathSpec<T> {
    pub fn new(p0: Vec<T>, p1: Vec<T>) -> Result<Self> {
        if p0.len() != p1.len() {
            return Err(Error::LengthMismatch(p0.len(), p1.len()));
        }
        if p0.is_empty() {
            return Err(Error::EmptySupport);
        }
        for (i, &v) in p0.iter().chain(&p1).enumerate() {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::OutOfRange {
                    index: i % p0.len(),
                    value: v.to_f64_lossy(),
                });
            }
        }
        let slopes: Vec<T> = p0.iter().zip(&p1).map(|(&a, &b)| b - a).collect();
        let monotone =
            slopes.iter().all(|&s| s >= T::zero()) || slopes.iter().all(|&s| s <= T::zero());
        Ok(Self { p0, p1, monotone })
    }

    pub fn p0(&self) -> &[T] {
        &self.p0
    }

    pub fn p1(&self) -> &[T] {
        &self.p1
    }

    /// Whether every slope has the same sign (zero slopes are compatible with either).
    pub fn monotone(&self) -> bool {
        self.monotone
    }

    pub fn m(&self) -> usize {
        self.p0.len()
    }

    pub fn slopes(&self) -> Vec<T> {
        self.p0.iter().zip(&self.p1).map(|(&a, &b)| b - a).collect()
    }

    /// `p(t)`; no range check, so `t` slightly outside `[0, 1]` extends the path affinely.
    pub fn at(&self, t: T) -> Vec<T> {
        self.p0
            .iter()
            .zip(&self.p1)
            .map(|(&a, &b)| (T::one() - t) * a + t * b)
            .collect()
    }

    fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            p0: perm.iter().map(|&i| self.p0[i]).collect(),
            p1: perm.iter().map(|&i| self.p1[i]).collect(),
            monotone: self.monotone,
        }
    }
}

impl<T: Real> PathSpec<T> {
    /// Same path with coordinates reordered by `perm`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.m()];
        if perm.len() != self.m() {
            return Err(Error::LengthMismatch(perm.len(), self.m()));
        }
        for &i in perm {
            if i >= self.m() || seen[i] {
                return Err(Error::BadParameter("not a permutation".into()));
            }
            seen[i] = true;
        }
        Ok(self.permuted(perm))
    }
}

pub fn so_path<T: Real>(p0: Vec<T>, p1: Vec<T>) -> Result<PathSpec<T>> {
    PathSpec::new(p0, p1)
}

fn check_t<T: Real>(t: T) -> Result<()> {
    if t >= T::zero() && t <= T::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            index: 0,
            value: t.to_f64_lossy(),
        })
    }
}

/// Law of the Bernoulli sum at `p(t)`.
pub fn path_pmf<T: Real>(path: &PathSpec<T>, t: T) -> Result<Pmf<T>> {
    check_t(t)?;
    Ok(Pmf::from_parts(
        bernoulli_sum_dp(&path.at(t)),
        T::zero(),
        None,
    ))
}

fn leave_out<T: Real>(ps: &[T], skip: &[usize]) -> Vec<T> {
    let kept: Vec<T> = ps
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, &p)| p)
        .collect();
    bernoulli_sum_dp(&kept)
}

/// `g(k) = Σ_i p_i' P^{(i)}(k)` and `h(k) = Σ_{i≠j} p_i' p_j' P^{(i,j)}(k)`,
/// where `P^{(i)}`, `P^{(i,j)}` omit the listed coordinates.
fn g_h<T: Real>(ps: &[T], slopes: &[T]) -> (Vec<T>, Vec<T>) {
    let m = ps.len();
    let mut g = vec![T::zero(); m];
    let mut h = vec![T::zero(); m.saturating_sub(1)];
    for i in 0..m {
        if slopes[i] == T::zero() {
            continue;
        }
        for (k, v) in leave_out(ps, &[i]).into_iter().enumerate() {
            g[k] += slopes[i] * v;
        }
        for j in i + 1..m {
            if slopes[j] == T::zero() {
                continue;
            }
            // Ordered pairs: (i, j) and (j, i) contribute equally.
            let w = T::lit(2.0) * slopes[i] * slopes[j];
            for (k, v) in leave_out(ps, &[i, j]).into_iter().enumerate() {
                h[k] += w * v;
            }
        }
    }
    (g, h)
}

fn at_or_zero<T: Real>(v: &[T], k: isize) -> T {
    if k < 0 {
        T::zero()
    } else {
        v.get(k as usize).copied().unwrap_or(T::zero())
    }
}

/// `∂P/∂t(k) = g(k−1) − g(k)` for `k = 0..=m`.
pub fn first_derivative<T: Real>(g: &[T]) -> Vec<T> {
    (0..=g.len() as isize)
        .map(|k| at_or_zero(g, k - 1) - at_or_zero(g, k))
        .collect()
}

/// `∂²P/∂t²(k) = h(k−2) − 2h(k−1) + h(k)` for `k = 0..=m`.
pub fn second_derivative<T: Real>(h: &[T]) -> Vec<T> {
    (0..=h.len() as isize + 1)
        .map(|k| at_or_zero(h, k - 2) - T::lit(2.0) * at_or_zero(h, k - 1) + at_or_zero(h, k))
        .collect()
}

#[derive(Debug, Clone)]
pub struct DerivativeDecomposition<T: Real> {
    pub pmf: Pmf<T>,
    pub g: Vec<T>,
    pub h: Vec<T>,
    /// Max gap between `g(k−1) − g(k)` and a central difference of `P` in `t`.
    pub fd_residual_1: T,
    /// Max gap between the `h` form and a central second difference.
    pub fd_residual_2: T,
}

/// [`path_pmf_derivatives_with_step`] at step `1e-4`.
pub fn path_pmf_derivatives<T: Real>(
    path: &PathSpec<T>,
    t: T,
) -> Result<DerivativeDecomposition<T>> {
    path_pmf_derivatives_with_step(path, t, T::lit(1e-4))
}

/// Gradient forms of the first two `t`-derivatives of `P_{p(t)}`, with
/// finite-difference residuals. Off-grid evaluations use the polynomial
/// extension of the path beyond `[0, 1]`.
pub fn path_pmf_derivatives_with_step<T: Real>(
    path: &PathSpec<T>,
    t: T,
    step: T,
) -> Result<DerivativeDecomposition<T>> {
    check_t(t)?;
    let ps = path.at(t);
    let (g, h) = g_h(&ps, &path.slopes());
    let mid = bernoulli_sum_dp(&ps);
    let up = bernoulli_sum_dp(&path.at(t + step));
    let down = bernoulli_sum_dp(&path.at(t - step));
    let d1 = first_derivative(&g);
    let d2 = second_derivative(&h);
    let two = T::lit(2.0);
    let mut r1 = T::zero();
    let mut r2 = T::zero();
    for k in 0..mid.len() {
        let fd1 = (up[k] - down[k]) / (two * step);
        let fd2 = (up[k] - two * mid[k] + down[k]) / (step * step);
        r1 = r1.max((fd1 - d1[k]).abs());
        r2 = r2.max((fd2 - d2[k]).abs());
    }
    Ok(DerivativeDecomposition {
        pmf: Pmf::from_parts(mid, T::zero(), None),
        g,
        h,
        fd_residual_1: r1,
        fd_residual_2: r2,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KeySlack<T> {
    pub min_slack: T,
    pub argmin_k: usize,
    /// Set for non-monotone paths, where no sign is claimed.
    pub exploratory: bool,
    pub slacks: Vec<T>,
}

/// `2g(k)g(k+1)f(k+1) − g(k)²f(k+2) − g(k+1)²f(k) − h(k)(f(k+1)² − f(k)f(k+2))`
/// with `f = P_{p(t)}`, for `k = 0..=m`.
pub fn key_inequality_slack<T: Real>(path: &PathSpec<T>, t: T) -> Result<KeySlack<T>> {
    if !(t > T::zero() && t < T::one()) {
        return Err(Error::OutOfRange {
            index: 0,
            value: t.to_f64_lossy(),
        });
    }
    let ps = path.at(t);
    let (g, h) = g_h(&ps, &path.slopes());
    let f = bernoulli_sum_dp(&ps);
    let two = T::lit(2.0);
    let slacks: Vec<T> = (0..=path.m() as isize)
        .map(|k| {
            let (g0, g1, hk) = (at_or_zero(&g, k), at_or_zero(&g, k + 1), at_or_zero(&h, k));
            let (f0, f1, f2) = (
                at_or_zero(&f, k),
                at_or_zero(&f, k + 1),
                at_or_zero(&f, k + 2),
            );
            two * g0 * g1 * f1 - g0 * g0 * f2 - g1 * g1 * f0 - hk * (f1 * f1 - f0 * f2)
        })
        .collect();
    let (argmin_k, &min_slack) = slacks
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("m >= 1");
    Ok(KeySlack {
        min_slack,
        argmin_k,
        exploratory: !path.monotone(),
        slacks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    Shannon,
    Renyi,
    Tsallis,
}

impl FromStr for EntropyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shannon" => Ok(Self::Shannon),
            "renyi" => Ok(Self::Renyi),
            "tsallis" => Ok(Self::Tsallis),
            other => Err(Error::BadParameter(format!(
                "unknown entropy kind `{other}`"
            ))),
        }
    }
}

/// Entropy of order `q` in nats; `q = 1` (or `kind = Shannon`) gives `−Σ P log P`.
pub fn generalized_entropy<T: Real>(probs: &[T], kind: EntropyKind, q: T) -> Result<T> {
    if kind != EntropyKind::Shannon && !(q > T::zero() && q.is_finite()) {
        return Err(Error::BadQ(q.to_f64_lossy()));
    }
    if kind == EntropyKind::Shannon || q == T::one() {
        return Ok(-probs.iter().map(|&p| p.xlogx()).sum::<T>());
    }
    let s: T = probs
        .iter()
        .filter(|&&p| p > T::zero())
        .map(|&p| p.powf(q))
        .sum();
    Ok(match kind {
        EntropyKind::Renyi => s.ln() / (T::one() - q),
        _ => (T::one() - s) / (q - T::one()),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint<T> {
    pub t: T,
    pub value: T,
    /// Central second difference divided by the squared grid step, so it
    /// estimates the second derivative; `None` at the two ends.
    pub second_difference: Option<T>,
}

/// Entropy along a uniform grid of `grid_size` points on `[0, 1]`.
pub fn entropy_profile<T: Real>(
    path: &PathSpec<T>,
    grid_size: usize,
    kind: EntropyKind,
    q: T,
) -> Result<Vec<ProfilePoint<T>>> {
    if grid_size < 5 {
        return Err(Error::BadParameter(format!("grid size {grid_size} < 5")));
    }
    let dt = T::one() / T::from_usize_lossy(grid_size - 1);
    let values = (0..grid_size)
        .map(|i| {
            let t = if i == grid_size - 1 {
                T::one()
            } else {
                T::from_usize_lossy(i) * dt
            };
            generalized_entropy(&bernoulli_sum_dp(&path.at(t)), kind, q).map(|v| (t, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..grid_size)
        .map(|i| ProfilePoint {
            t: values[i].0,
            value: values[i].1,
            second_difference: (i > 0 && i + 1 < grid_size).then(|| {
                (values[i - 1].1 - T::lit(2.0) * values[i].1 + values[i + 1].1) / (dt * dt)
            }),
        })
        .collect())
}

/// Largest interior second difference of a profile and its location.
pub fn max_second_difference<T: Real>(profile: &[ProfilePoint<T>]) -> Option<(T, T)> {
    profile
        .iter()
        .filter_map(|p| p.second_difference.map(|d| (p.t, d)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
}

/// A path along which a generalized entropy has a convex stretch.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityWitness<T> {
    pub kind: EntropyKind,
    pub q: T,
    pub trial: u64,
    pub path: PathSpec<T>,
    pub t: T,
    pub second_difference: T,
}

fn scan_suite_name(kind: EntropyKind) -> String {
    format!(
        "convexity-scan-{}",
        serde_json::to_value(kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    )
}

/// Searches `trials` random paths on `m` coordinates for an interior second
/// difference above [`WITNESS_THRESHOLD`]; returns the lowest-index hit.
pub fn find_convexity_witness<T: Real>(
    kind: EntropyKind,
    q: T,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<Option<ConvexityWitness<T>>> {
    generalized_entropy(&[T::one()], kind, q)?;
    let suite = scan_suite_name(kind);
    let hits = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, &suite, trial);
            let path: PathSpec<T> = random_path(&mut rng, m.max(1));
            let profile = entropy_profile(&path, SCAN_GRID, kind, q)?;
            Ok(max_second_difference(&profile)
                .filter(|&(_, d)| d > T::lit(WITNESS_THRESHOLD))
                .map(|(t, d)| ConvexityWitness {
                    kind,
                    q,
                    trial,
                    path,
                    t,
                    second_difference: d,
                }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.into_iter().flatten().next())
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalQ<T> {
    pub kind: EntropyKind,
    pub q_hat: T,
    pub bracket: (T, T),
    /// `(q, witness found)` for each bisection level, in evaluation order.
    pub levels: Vec<(T, bool)>,
    pub witness: Option<ConvexityWitness<T>>,
}

/// Bisection on `q ∈ [1, 6]` for the onset of non-concavity, using the same
/// `trials` random paths at every level.
pub fn critical_q_search<T: Real>(
    kind: EntropyKind,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<CriticalQ<T>> {
    if kind == EntropyKind::Shannon {
        return Err(Error::BadParameter(
            "critical q search needs renyi or tsallis".into(),
        ));
    }
    let (mut lo, mut hi) = (T::lit(Q_BRACKET.0), T::lit(Q_BRACKET.1));
    let mut levels = Vec::new();
    let mut witness = None;
    while hi - lo > T::lit(Q_WIDTH) {
        let mid = (lo + hi) / T::lit(2.0);
        let found = find_convexity_witness(kind, mid, m, trials, seed)?;
        levels.push((mid, found.is_some()));
        match found {
            Some(w) => {
                hi = mid;
                witness = Some(w);
            }
            None => lo = mid,
        }
    }
    Ok(CriticalQ {
        kind,
        q_hat: (lo + hi) / T::lit(2.0),
        bracket: (lo, hi),
        levels,
        witness,
    })
}

/// Entropy decrease along a direction that raises every coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneViolation<T> {
    pub trial: u64,
    pub p: Vec<T>,
    pub direction: Vec<T>,
    pub step: T,
    pub h_before: T,
    pub h_after: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneEntropyReport<T> {
    pub m: usize,
    pub trials: usize,
    pub violations: Vec<MonotoneViolation<T>>,
}

/// Entropy increments `H(p + s_{i+1} d) − H(p + s_i d)` over increasing `steps`
/// (starting from `s_0 = 0`).
pub fn directional_increments<T: Real>(p: &[T], direction: &[T], steps: &[T]) -> Result<Vec<T>> {
    if p.len() != direction.len() {
        return Err(Error::LengthMismatch(p.len(), direction.len()));
    }
    if let Some(index) = direction.iter().position(|&d| !(d >= T::zero())) {
        return Err(Error::DirectionNotIncreasing { index });
    }
    let h = |s: T| -> Result<T> {
        let q: Vec<T> = p.iter().zip(direction).map(|(&a, &d)| a + s * d).collect();
        if let Some(i) = q.iter().position(|&v| !(v >= T::zero() && v <= T::one())) {
            return Err(Error::OutOfRange {
                index: i,
                value: q[i].to_f64_lossy(),
            });
        }
        generalized_entropy(&bernoulli_sum_dp(&q), EntropyKind::Shannon, T::one())
    };
    let mut prev = h(T::zero())?;
    let mut out = Vec::with_capacity(steps.len());
    for &s in steps {
        let cur = h(s)?;
        out.push(cur - prev);
        prev = cur;
    }
    Ok(out)
}

const MONOTONE_STEPS: usize = 8;
const MONOTONE_SLACK: f64 = 1e-12;

/// Random points of `[0, 1/2]^m` and random nonnegative directions that stay
/// inside `[0, 1/2]^m`; every entropy decrease is recorded.
pub fn monotone_entropy_check<T: Real>(
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<MonotoneEntropyReport<T>> {
    use rand::Rng;
    let m = m.max(1);
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, "monotone-entropy", trial);
            let p: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=0.5)).collect();
            let d: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=1.0)).collect();
            // Longest step keeping every coordinate at or below 1/2.
            let reach = p
                .iter()
                .zip(&d)
                .filter(|(_, &di)| di > 0.0)
                .map(|(&pi, &di)| (0.5 - pi) / di)
                .fold(f64::INFINITY, f64::min);
            let reach = if reach.is_finite() { reach } else { 0.0 };
            let pt: Vec<T> = p.iter().map(|&v| T::lit(v)).collect();
            let dt: Vec<T> = d.iter().map(|&v| T::lit(v)).collect();
            let steps: Vec<T> = (1..=MONOTONE_STEPS)
                .map(|i| T::lit(reach * i as f64 / MONOTONE_STEPS as f64))
                .collect();
            let inc = directional_increments(&pt, &dt, &steps)?;
            let mut found = Vec::new();
            let mut before = T::zero();
            for (i, &delta) in inc.iter().enumerate() {
                if delta < -T::lit(MONOTONE_SLACK) {
                    let q: Vec<T> = pt
                        .iter()
                        .zip(&dt)
                        .map(|(&a, &dd)| a + before * dd)
                        .collect();
                    let h0 =
                        generalized_entropy(&bernoulli_sum_dp(&q), EntropyKind::Shannon, T::one())?;
                    found.push(MonotoneViolation {
                        trial,
                        p: pt.clone(),
                        direction: dt.clone(),
                        step: steps[i],
                        h_before: h0,
                        h_after: h0 + delta,
                    });
                }
                before = steps[i];
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonotoneEntropyReport {
        m,
        trials,
        violations: per_trial.into_iter().flatten().collect(),
    })
}
