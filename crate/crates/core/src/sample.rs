//! Deterministic random instance generators for the randomized checks.
//!
//! Every trial draws from its own ChaCha stream seeded by
//! [`trial_seed`]`(master, suite, index)`, so serial and parallel runs see
//! identical instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pmf::{bernoulli_sum_dp, Family, Pmf};
use crate::real::Real;
use crate::shepp_olkin::PathSpec;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the suite name.
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Per-trial seed: `mix64(mix64(master ^ fnv1a(suite)) + index)`.
pub fn trial_seed(master: u64, suite: &str, index: u64) -> u64 {
    mix64(mix64(master ^ name_hash(suite)).wrapping_add(index))
}

pub fn trial_rng(master: u64, suite: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, suite, index))
}

fn normalize<T: Real>(w: Vec<f64>) -> Pmf<T> {
    let s: f64 = w.iter().sum();
    let probs: Vec<T> = w.iter().map(|&v| T::lit(v / s)).collect();
    let total: T = probs.iter().copied().sum();
    Pmf::exact(probs.into_iter().map(|v| v / total).collect()).expect("normalized weights")
}

/// Strictly positive weights on `{0, ..., L-1}` with `1 <= L <= max_len`.
pub fn random_pmf<T: Real, R: Rng>(rng: &mut R, max_len: usize) -> Pmf<T> {
    let len = rng.gen_range(1..=max_len.max(1));
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.02..1.0)).collect();
    normalize(w)
}

/// Random law with positive mean and at least two support points.
pub fn random_nondegenerate<T: Real, R: Rng>(rng: &mut R, max_len: usize) -> Pmf<T> {
    let len = rng.gen_range(2..=max_len.max(2));
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.02..1.0)).collect();
    normalize(w)
}

/// Random ultra-log-concave law on at most `max_len` points.
///
/// Most draws set `log(P/Π_μ)` to a random strictly concave piecewise-linear
/// sequence, which is ultra-log-concave by construction; the rest are
/// Bernoulli sums with random success probabilities.
pub fn random_ulc<T: Real, R: Rng>(rng: &mut R, max_len: usize) -> Pmf<T> {
    let max_len = max_len.max(2);
    if rng.gen_bool(0.3) {
        let m = rng.gen_range(1..max_len);
        let ps: Vec<f64> = (0..m).map(|_| rng.gen_range(0.02..0.98)).collect();
        return normalize(bernoulli_sum_dp(&ps));
    }
    let len = rng.gen_range(2..=max_len);
    let mu: f64 = rng.gen_range(0.2..5.0);
    let mut slope: f64 = rng.gen_range(-2.0..2.0);
    let mut log_w = 0.0;
    let mut log_fact = 0.0;
    let mut logs = Vec::with_capacity(len);
    for x in 0..len {
        if x > 0 {
            log_fact += (x as f64).ln();
        }
        logs.push(x as f64 * mu.ln() - log_fact + log_w);
        log_w += slope;
        slope -= rng.gen_range(0.02..1.5);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    normalize(logs.iter().map(|&l| (l - top).exp()).collect())
}

/// Parameters `(λ, β)` of a tilted Poisson law, `λ ∈ [0.2, 5]`, `β ∈ [0, 0.5]`.
pub fn random_tilted<T: Real, R: Rng>(rng: &mut R) -> Family<T> {
    Family::TiltedPoisson {
        lambda: T::lit(rng.gen_range(0.2..=5.0)),
        beta: T::lit(rng.gen_range(0.0..=0.5)),
    }
}

/// Positive function with `|log f(x+1) − log f(x)| <= lip` and `|log f| <= 3`.
pub fn random_log_lipschitz<T: Real, R: Rng>(rng: &mut R, len: usize, lip: f64) -> Vec<T> {
    let mut s: f64 = rng.gen_range(-1.0..1.0);
    (0..len)
        .map(|_| {
            let v = T::lit(s.exp());
            s = (s + rng.gen_range(-lip..=lip)).clamp(-3.0, 3.0);
            v
        })
        .collect()
}

fn endpoint<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.0..=1.0),
    }
}

/// Random affine parameter path on `m` coordinates; endpoints are occasionally
/// pinned to 0 or 1 so boundary behavior is exercised.
pub fn random_path<T: Real, R: Rng>(rng: &mut R, m: usize) -> PathSpec<T> {
    let p0: Vec<T> = (0..m).map(|_| T::lit(endpoint(rng))).collect();
    let p1: Vec<T> = (0..m).map(|_| T::lit(endpoint(rng))).collect();
    PathSpec::new(p0, p1).expect("coordinates in range")
}

/// Random path on which every coordinate moves in the same direction.
pub fn random_monotone_path<T: Real, R: Rng>(rng: &mut R, m: usize) -> PathSpec<T> {
    let up = rng.gen_bool(0.5);
    let mut p0 = Vec::with_capacity(m);
    let mut p1 = Vec::with_capacity(m);
    for _ in 0..m {
        let (a, b) = (endpoint(rng), endpoint(rng));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s, e) = if up { (lo, hi) } else { (hi, lo) };
        p0.push(T::lit(s));
        p1.push(T::lit(e));
    }
    PathSpec::new(p0, p1).expect("coordinates in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::ulc_check;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(trial_seed(7, "maxent", 3), trial_seed(7, "maxent", 3));
        assert_ne!(trial_seed(7, "maxent", 3), trial_seed(7, "maxent", 4));
        assert_ne!(trial_seed(7, "maxent", 3), trial_seed(7, "poincare", 3));
        assert_ne!(trial_seed(7, "maxent", 3), trial_seed(8, "maxent", 3));
    }

    #[test]
    fn ulc_sampler_yields_ulc() {
        for i in 0..500 {
            let mut rng = trial_rng(1, "ulc-sampler", i);
            let p: Pmf<f64> = random_ulc(&mut rng, 12);
            assert!(ulc_check(&p), "{:?}", p.probs());
        }
    }

    #[test]
    fn monotone_paths_are_monotone() {
        for i in 0..100 {
            let mut rng = trial_rng(1, "paths", i);
            let path: PathSpec<f64> = random_monotone_path(&mut rng, 5);
            assert!(path.monotone());
        }
    }
}
