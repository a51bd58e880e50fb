//! Rényi thinning and the thinning interpolation toward the Poisson law.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::{Family, Pmf};
use crate::real::Real;

/// Default central-difference step for derivative checks.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Tail tolerance for the Poisson factor when laws are tabulated to a fixed length.
const FIXED_LEN_TOL: f64 = 1e-17;

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha >= T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha.to_f64_lossy()))
    }
}

/// Thinned table `Σ_y C(y,x) α^x (1−α)^{y−x} P(y)` of a raw mass vector.
fn thin_probs<T: Real>(probs: &[T], alpha: T) -> Vec<T> {
    let beta = T::one() - alpha;
    let mut out = vec![T::zero(); probs.len()];
    // Binomial(y, α) row, advanced one trial at a time.
    let mut row = Vec::with_capacity(probs.len());
    row.push(T::one());
    for (y, &py) in probs.iter().enumerate() {
        if y > 0 {
            row.push(T::zero());
            for k in (1..row.len()).rev() {
                row[k] = row[k] * beta + row[k - 1] * alpha;
            }
            row[0] *= beta;
        }
        if py != T::zero() {
            for (k, &b) in row.iter().enumerate() {
                out[k] += py * b;
            }
        }
    }
    out
}

fn thinned_family<T: Real>(f: &Family<T>, alpha: T) -> Option<Family<T>> {
    match f {
        Family::Poisson { lambda } if alpha > T::zero() => Some(Family::Poisson {
            lambda: *lambda * alpha,
        }),
        Family::Bernoulli { p } => Some(Family::Bernoulli { p: *p * alpha }),
        Family::Binomial { n, p } => Some(Family::Binomial {
            n: *n,
            p: *p * alpha,
        }),
        Family::BernoulliSum { ps } => Some(Family::BernoulliSum {
            ps: ps.iter().map(|&p| p * alpha).collect(),
        }),
        Family::NegativeBinomial { r, p } if alpha > T::zero() => {
            let np = *p / (*p + alpha * (T::one() - *p));
            Some(Family::NegativeBinomial { r: *r, p: np })
        }
        Family::Geometric { p } if alpha > T::zero() => Some(Family::Geometric {
            p: *p / (*p + alpha * (T::one() - *p)),
        }),
        _ => None,
    }
}

/// α-thinning `T_α P`: each unit of the count survives independently with probability α.
pub fn thin<T: Real>(p: &Pmf<T>, alpha: T) -> Result<Pmf<T>> {
    check_alpha(alpha)?;
    let fam = p.family().and_then(|f| thinned_family(f, alpha));
    Ok(Pmf::from_parts(
        thin_probs(p.probs(), alpha),
        p.tail_bound(),
        fam,
    ))
}

/// Poisson masses `Π_μ(0..len)` by the successor recurrence.
fn poisson_table<T: Real>(mu: T, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    let mut m = (-mu).exp();
    for k in 0..len {
        out.push(m);
        m = m * mu / T::from_usize_lossy(k + 1);
    }
    out
}

/// Length after which the remaining `Π_μ` mass is below [`FIXED_LEN_TOL`].
fn poisson_len<T: Real>(mu: T) -> usize {
    if mu <= T::zero() {
        return 1;
    }
    let tol = T::lit(FIXED_LEN_TOL);
    let half = T::lit(0.5);
    let mut term = (-mu).exp();
    let mut k = 0usize;
    // Once the ratio μ/(k+1) is at most 1/2 the tail is below twice the term.
    loop {
        let ratio = mu / T::from_usize_lossy(k + 1);
        term *= ratio;
        k += 1;
        if ratio <= half && term <= tol {
            return k + 1;
        }
    }
}

/// First `len` masses of `T_α P ⋆ Π_{(1−α)λ}`; every returned entry is exact
/// for the stored `P` because only Poisson terms at or below the index enter.
fn law_fixed_len<T: Real>(probs: &[T], alpha: T, lambda: T, len: usize) -> Vec<T> {
    let thinned = thin_probs(probs, alpha);
    let pois = poisson_table((T::one() - alpha) * lambda, len);
    let mut out = vec![T::zero(); len];
    for (i, &a) in thinned.iter().enumerate().take(len) {
        if a == T::zero() {
            continue;
        }
        for (j, &b) in pois.iter().enumerate().take(len - i) {
            out[i + j] += a * b;
        }
    }
    out
}

/// `P(x) ρ(x) = (x+1) P(x+1)/λ − P(x)` for `x < len − 1`.
fn score_flux<T: Real>(law: &[T], lambda: T) -> Vec<T> {
    (0..law.len().saturating_sub(1))
        .map(|x| T::from_usize_lossy(x + 1) * law[x + 1] / lambda - law[x])
        .collect()
}

/// State of the interpolation `T_α X + T_{1−α} Z`, `Z ~ Π_λ`, `λ` the mean of `X`.
#[derive(Debug, Clone)]
pub struct InterpolationState<T: Real> {
    pub base: Pmf<T>,
    pub alpha: T,
    pub lambda: T,
    pub law: Pmf<T>,
}

pub fn interpolate<T: Real>(p: &Pmf<T>, alpha: T) -> Result<InterpolationState<T>> {
    check_alpha(alpha)?;
    let lambda = p.mean();
    if !(lambda > T::zero()) {
        return Err(Error::ZeroMean);
    }
    let thinned = thin(p, alpha)?;
    let mu = (T::one() - alpha) * lambda;
    let law = if mu > T::zero() {
        let pois = Pmf::from_family(Family::Poisson { lambda: mu }, T::lit(T::DEFAULT_TRUNC_TOL))?;
        thinned.convolve(&pois)
    } else {
        thinned
    };
    Ok(InterpolationState {
        base: p.clone(),
        alpha,
        lambda,
        law,
    })
}

/// Residual of a finite-difference check at two step sizes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepHalving<T> {
    pub coarse: T,
    pub fine: T,
    /// `coarse / fine`; close to 4 for a second-order scheme.
    pub ratio: T,
}

impl<T: Real> StepHalving<T> {
    fn new(coarse: T, fine: T) -> Self {
        let ratio = if fine > T::zero() {
            coarse / fine
        } else {
            T::infinity()
        };
        Self {
            coarse,
            fine,
            ratio,
        }
    }
}

/// Maximum over `x` of the gap between a central difference of `P_α(x)` in
/// `α` and the gradient form `(λ/α) Δ*(P_α ρ_α)(x)`.
pub fn pde_residual<T: Real>(p: &Pmf<T>, alpha: T, step: T) -> Result<T> {
    check_alpha(alpha)?;
    if !(step > T::zero()) || alpha <= step || alpha >= T::one() - step {
        return Err(Error::AlphaTooClose {
            alpha: alpha.to_f64_lossy(),
            step: step.to_f64_lossy(),
        });
    }
    let lambda = p.mean();
    if !(lambda > T::zero()) {
        return Err(Error::ZeroMean);
    }
    let len = p.len() + poisson_len((T::one() - alpha + step) * lambda);
    let probs = p.probs();
    let up = law_fixed_len(probs, alpha + step, lambda, len);
    let down = law_fixed_len(probs, alpha - step, lambda, len);
    let mid = law_fixed_len(probs, alpha, lambda, len);
    let flux = score_flux(&mid, lambda);
    let scale = lambda / alpha;
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for x in 0..flux.len() {
        let prev = if x == 0 { T::zero() } else { flux[x - 1] };
        let rhs = scale * (prev - flux[x]);
        let lhs = (up[x] - down[x]) / (two * step);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// [`pde_residual`] at `step` and `step / 2`.
pub fn pde_residual_halving<T: Real>(p: &Pmf<T>, alpha: T, step: T) -> Result<StepHalving<T>> {
    let coarse = pde_residual(p, alpha, step)?;
    let fine = pde_residual(p, alpha, step / T::lit(2.0))?;
    Ok(StepHalving::new(coarse, fine))
}

/// One grid point of the free-energy path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeEnergyPoint<T> {
    pub alpha: T,
    /// `Λ(α) = −Σ P_α(x) log Π_λ(x)`.
    pub lambda_val: T,
    /// Covariance form `(λ/α) Σ P_α ρ_α log((x+1)/λ)`.
    pub deriv_cov: T,
    /// Second-order finite difference of `Λ` at the default step.
    pub deriv_fd: T,
    /// The same difference at half the step.
    pub deriv_fd_half: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeEnergyPath<T> {
    pub lambda: T,
    /// `Λ(0) = H(Π_λ)`, evaluated on the Poisson law directly.
    pub lambda_at_zero: T,
    pub points: Vec<FreeEnergyPoint<T>>,
}

struct FreeEnergy<'a, T: Real> {
    probs: &'a [T],
    lambda: T,
    len: usize,
    log_pois: Vec<T>,
}

impl<T: Real> FreeEnergy<'_, T> {
    fn value(&self, alpha: T) -> T {
        self.cross_entropy(&law_fixed_len(self.probs, alpha, self.lambda, self.len))
    }

    fn cross_entropy(&self, law: &[T]) -> T {
        -law.iter()
            .zip(&self.log_pois)
            .map(|(&p, &l)| p * l)
            .sum::<T>()
    }

    fn fd(&self, alpha: T, h: T) -> T {
        let two = T::lit(2.0);
        if alpha - h >= T::zero() && alpha + h <= T::one() {
            (self.value(alpha + h) - self.value(alpha - h)) / (two * h)
        } else if alpha - two * h >= T::zero() {
            (T::lit(3.0) * self.value(alpha) - T::lit(4.0) * self.value(alpha - h)
                + self.value(alpha - two * h))
                / (two * h)
        } else {
            (-T::lit(3.0) * self.value(alpha) + T::lit(4.0) * self.value(alpha + h)
                - self.value(alpha + two * h))
                / (two * h)
        }
    }

    fn cov(&self, alpha: T) -> T {
        let law = law_fixed_len(self.probs, alpha, self.lambda, self.len);
        let flux = score_flux(&law, self.lambda);
        let s: T = flux
            .iter()
            .enumerate()
            .map(|(x, &f)| f * (T::from_usize_lossy(x + 1) / self.lambda).ln())
            .sum();
        self.lambda / alpha * s
    }
}

/// Evaluates `Λ(α)` and both forms of `Λ'(α)` along `grid` (sorted, inside `(0, 1]`).
pub fn free_energy_path<T: Real>(p: &Pmf<T>, grid: &[T]) -> Result<FreeEnergyPath<T>> {
    free_energy_path_with_step(p, grid, T::lit(DEFAULT_FD_STEP))
}

/// [`free_energy_path`] with an explicit finite-difference step.
pub fn free_energy_path_with_step<T: Real>(
    p: &Pmf<T>,
    grid: &[T],
    step: T,
) -> Result<FreeEnergyPath<T>> {
    if !(step > T::zero() && step < T::lit(0.25)) {
        return Err(Error::BadParameter(format!(
            "finite-difference step {step} outside (0, 0.25)"
        )));
    }
    let lambda = p.mean();
    if !(lambda > T::zero()) {
        return Err(Error::ZeroMean);
    }
    for (i, &a) in grid.iter().enumerate() {
        if !(a > T::zero() && a <= T::one()) {
            return Err(Error::AlphaOutOfRange(a.to_f64_lossy()));
        }
        if i > 0 && a <= grid[i - 1] {
            return Err(Error::BadParameter(
                "grid must be strictly increasing".into(),
            ));
        }
    }
    let len = p.len() + poisson_len(lambda);
    let mut log_pois = Vec::with_capacity(len);
    let mut log_fact = T::zero();
    for x in 0..len {
        if x > 0 {
            log_fact += T::from_usize_lossy(x).ln();
        }
        log_pois.push(-lambda + T::from_usize_lossy(x) * lambda.ln() - log_fact);
    }
    let fe = FreeEnergy {
        probs: p.probs(),
        lambda,
        len,
        log_pois,
    };
    let h = step;
    let points = grid
        .par_iter()
        .map(|&alpha| FreeEnergyPoint {
            alpha,
            lambda_val: fe.value(alpha),
            deriv_cov: fe.cov(alpha),
            deriv_fd: fe.fd(alpha, h),
            deriv_fd_half: fe.fd(alpha, h / T::lit(2.0)),
        })
        .collect();
    let lambda_at_zero = fe.cross_entropy(&poisson_table(lambda, len));
    Ok(FreeEnergyPath {
        lambda,
        lambda_at_zero,
        points,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::pmf::{entropy, tv_distance, ulc_check};
    use crate::sample::{random_nondegenerate, random_ulc, trial_rng};

    #[test]
    fn thin_poisson_is_poisson() {
        let p = Pmf::poisson(3.0).unwrap();
        let t = thin(&p, 0.4).unwrap();
        let q = Pmf::poisson(1.2).unwrap();
        assert!(tv_distance(&t, &q) <= t.tail_bound() + q.tail_bound() + 1e-15);
        assert_eq!(t.family(), Some(&Family::Poisson { lambda: 3.0 * 0.4 }));
    }

    #[test]
    fn thin_bernoulli_and_endpoints() {
        let t = thin(&Pmf::bernoulli(0.6).unwrap(), 0.5).unwrap();
        assert_abs_diff_eq!(t.mass(0), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(t.mass(1), 0.3, epsilon = 1e-15);
        let p = Pmf::exact(vec![0.1, 0.4, 0.2, 0.3]).unwrap();
        assert_eq!(thin(&p, 1.0).unwrap().probs(), p.probs());
        assert_eq!(thin(&p, 0.0).unwrap().probs(), &[1.0]);
        assert!(matches!(thin(&p, 1.5), Err(Error::AlphaOutOfRange(_))));
    }

    #[test]
    fn interpolation_endpoints() {
        let p = Pmf::binomial(5, 0.3).unwrap();
        let one = interpolate(&p, 1.0).unwrap();
        assert_eq!(one.law.probs(), p.probs());
        let zero = interpolate(&p, 0.0).unwrap();
        let pois = Pmf::poisson(1.5).unwrap();
        assert!(tv_distance(&zero.law, &pois) <= 1e-11);
        let pp = interpolate(&pois, 0.37).unwrap();
        assert!(tv_distance(&pp.law, &pois) <= 1e-11);
        assert!(matches!(
            interpolate(&Pmf::<f64>::point(0), 0.5),
            Err(Error::ZeroMean)
        ));
    }

    #[test]
    fn interpolation_of_point_mass() {
        let st = interpolate(&Pmf::<f64>::point(1), 0.5).unwrap();
        // Oracle: Bernoulli(1/2) ⋆ Poisson(1/2), built by hand.
        for x in 0..st.law.len() {
            let pois = |k: usize| {
                (-0.5f64).exp() * 0.5f64.powi(k as i32) / (1..=k).product::<usize>() as f64
            };
            let want = 0.5 * pois(x) + if x > 0 { 0.5 * pois(x - 1) } else { 0.0 };
            assert_abs_diff_eq!(st.law.mass(x), want, epsilon = st.law.tail_bound() + 1e-15);
        }
        assert_abs_diff_eq!(st.law.mean(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn pde_residual_cases() {
        let pois = Pmf::poisson(2.0).unwrap();
        assert!(pde_residual(&pois, 0.5, 1e-4).unwrap() <= 1e-10);
        let b = Pmf::binomial(4, 0.4).unwrap();
        let r = pde_residual_halving(&b, 0.5, 1e-4).unwrap();
        assert!(r.coarse <= 1e-6, "{r:?}");
        assert!(r.ratio > 3.5 && r.ratio < 4.5, "{r:?}");
        assert!(matches!(
            pde_residual(&b, 5e-5, 1e-4),
            Err(Error::AlphaTooClose { .. })
        ));
        assert!(matches!(
            pde_residual(&b, 1.0 - 5e-5, 1e-4),
            Err(Error::AlphaTooClose { .. })
        ));
    }

    #[test]
    fn free_energy_cases() {
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        let pois = Pmf::from_family(Family::Poisson { lambda: 1.7 }, 1e-15).unwrap();
        let path = free_energy_path(&pois, &grid).unwrap();
        let target = Pmf::from_family(
            Family::Poisson {
                lambda: path.lambda,
            },
            1e-16,
        )
        .unwrap();
        assert_abs_diff_eq!(path.lambda_at_zero, entropy(&target), epsilon = 1e-13);
        for pt in &path.points {
            assert!(pt.deriv_cov.abs() <= 1e-12, "{pt:?}");
        }

        let b = Pmf::binomial(6, 0.45).unwrap();
        let path = free_energy_path(&b, &grid).unwrap();
        let mut prev = path.lambda_at_zero;
        for pt in &path.points {
            assert!(pt.lambda_val <= prev + 1e-12);
            assert!(pt.deriv_cov <= 1e-10);
            assert!((pt.deriv_cov - pt.deriv_fd).abs() <= 1e-6, "{pt:?}");
            prev = pt.lambda_val;
        }
        // Λ(1) is the cross-entropy of P against Π_λ.
        let last = path.points.last().unwrap();
        let cross: f64 = -(0..b.len())
            .map(|x| {
                let lf: f64 = (1..=x).map(|k| (k as f64).ln()).sum();
                b.mass(x) * (-2.7 + x as f64 * 2.7f64.ln() - lf)
            })
            .sum::<f64>();
        assert_abs_diff_eq!(last.lambda_val, cross, epsilon = 1e-12);
    }

    #[test]
    fn derivative_forms_converge_at_second_order() {
        let p = Pmf::<f64>::exact(vec![0.1, 0.5, 0.1, 0.3]).unwrap();
        // Rounding noise swamps the truncation error below a step of about 1e-3.
        let path = free_energy_path_with_step(&p, &[0.3, 0.6, 1.0], 1e-2).unwrap();
        for pt in &path.points {
            let e1 = (pt.deriv_fd - pt.deriv_cov).abs();
            let e2 = (pt.deriv_fd_half - pt.deriv_cov).abs();
            assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "{pt:?}");
        }
    }

    #[test]
    fn ulc_preserved_by_thinning() {
        for i in 0..300 {
            let mut rng = trial_rng(3, "thin-ulc", i);
            let p: Pmf<f64> = random_ulc(&mut rng, 12);
            let alpha = rand::Rng::gen_range(&mut rng, 0.0..=1.0);
            assert!(ulc_check(&thin(&p, alpha).unwrap()));
        }
    }

    #[test]
    fn interpolation_keeps_mean() {
        for i in 0..50 {
            let mut rng = trial_rng(3, "interp-mean", i);
            let p: Pmf<f64> = random_nondegenerate(&mut rng, 10);
            let alpha = rand::Rng::gen_range(&mut rng, 0.0..=1.0);
            let st = interpolate(&p, alpha).unwrap();
            assert!((st.law.mean() - st.lambda).abs() <= 1e-9);
        }
    }

    proptest! {
        #[test]
        fn thinning_is_mean_linear_and_a_semigroup(
            w in prop::collection::vec(0.01f64..1.0, 1..12),
            a in 0.0f64..=1.0,
            b in 0.0f64..=1.0,
        ) {
            let s: f64 = w.iter().sum();
            let p = Pmf::exact(w.iter().map(|v| v / s).collect()).unwrap();
            let ta = thin(&p, a).unwrap();
            prop_assert!((ta.mean() - a * p.mean()).abs() <= 1e-10);
            let tab = thin(&ta, b).unwrap();
            let direct = thin(&p, a * b).unwrap();
            for x in 0..p.len() {
                prop_assert!((tab.mass(x) - direct.mass(x)).abs() <= 1e-12);
            }
        }
    }
}
