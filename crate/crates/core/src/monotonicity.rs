//! Maximum entropy of ultra-log-concave laws and monotonicity of entropy
//! under thinned sums.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::poisson_reference;
use crate::pmf::{entropy, relative_entropy, stochastic_order, ulc_check, OrderKind, Pmf};
use crate::real::Real;
use crate::thinning::thin;

/// Strongest sufficient condition verified for the maximum-entropy bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Ulc,
    SizeBiasSt,
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxentGap<T> {
    /// `H(Π_λ) − H(P)`.
    pub gap: T,
    pub hypothesis: Hypothesis,
    pub lambda: T,
    pub entropy: T,
    pub poisson_entropy: T,
}

pub fn maxent_gap<T: Real>(p: &Pmf<T>) -> Result<MaxentGap<T>> {
    let lambda = p.mean();
    if !(lambda > T::zero()) {
        return Err(Error::ZeroMean);
    }
    let hypothesis = if ulc_check(p) {
        Hypothesis::Ulc
    } else if stochastic_order(p, &p.size_bias()?, OrderKind::Stochastic)? {
        Hypothesis::SizeBiasSt
    } else {
        Hypothesis::None
    };
    let h = entropy(p);
    let hp = entropy(&poisson_reference(lambda)?);
    Ok(MaxentGap {
        gap: hp - h,
        hypothesis,
        lambda,
        entropy: h,
        poisson_entropy: hp,
    })
}

/// `D(P_Y ‖ Π_{λ_Y})`; zero for a point mass at zero.
pub fn poisson_divergence<T: Real>(p: &Pmf<T>) -> Result<T> {
    let lambda = p.mean();
    if lambda == T::zero() {
        return Ok(T::zero());
    }
    Ok(relative_entropy(p, &poisson_reference(lambda)?))
}

fn convolve_all<T: Real>(laws: &[Pmf<T>]) -> Pmf<T> {
    laws[1..]
        .iter()
        .fold(laws[0].clone(), |acc, p| acc.convolve(p))
}

/// Law of `Σ_{i=1}^n T_{1/n} X_i` for i.i.d. `X_i ~ P`.
pub fn thinned_sum_law<T: Real>(p: &Pmf<T>, n: usize) -> Result<Pmf<T>> {
    let t = thin(p, T::one() / T::from_usize_lossy(n))?;
    Ok(convolve_all(&vec![t; n]))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThinLawRecord<T> {
    pub n: usize,
    /// `D(law_n ‖ Π_λ)`.
    pub d_n: T,
    /// `H(law_n)`.
    pub h_n: T,
}

pub fn thin_law_sequences<T: Real>(p: &Pmf<T>, n_max: usize) -> Result<Vec<ThinLawRecord<T>>> {
    if n_max < 2 {
        return Err(Error::BadParameter(format!("n_max = {n_max} < 2")));
    }
    let lambda = p.mean();
    if !(lambda > T::zero()) {
        return Err(Error::ZeroMean);
    }
    let pois = poisson_reference(lambda)?;
    (1..=n_max)
        .map(|n| {
            let law = thinned_sum_law(p, n)?;
            Ok(ThinLawRecord {
                n,
                d_n: relative_entropy(&law, &pois),
                h_n: entropy(&law),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeaveOneOutKind {
    Entropy,
    RelativeEntropy,
}

/// Independent laws `X_1..X_{n+1}` with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct LeaveOneOutInstance<T: Real> {
    pmfs: Vec<Pmf<T>>,
    alphas: Vec<T>,
    kind: LeaveOneOutKind,
}

impl<T: Real> LeaveOneOutInstance<T> {
    pub fn new(pmfs: Vec<Pmf<T>>, alphas: Vec<T>, kind: LeaveOneOutKind) -> Result<Self> {
        if pmfs.len() != alphas.len() {
            return Err(Error::LengthMismatch(pmfs.len(), alphas.len()));
        }
        if pmfs.len() < 2 {
            return Err(Error::BadParameter("need at least two laws".into()));
        }
        if let Some(a) = alphas.iter().find(|&&a| !(a > T::zero())) {
            return Err(Error::BadParameter(format!("weight {a} is not positive")));
        }
        let total: T = alphas.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(T::NORM_SLACK) {
            return Err(Error::BadParameter(format!("weights sum to {total}")));
        }
        Ok(Self { pmfs, alphas, kind })
    }

    pub fn pmfs(&self) -> &[Pmf<T>] {
        &self.pmfs
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn kind(&self) -> LeaveOneOutKind {
        self.kind
    }
}

fn thinned_sum<T: Real>(pmfs: &[Pmf<T>], alphas: &[T], skip: Option<usize>) -> Result<Pmf<T>> {
    let scale = skip.map_or(T::one(), |j| T::one() - alphas[j]);
    let parts = pmfs
        .iter()
        .zip(alphas)
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, (p, &a))| thin(p, (a / scale).min(T::one())))
        .collect::<Result<Vec<_>>>()?;
    Ok(convolve_all(&parts))
}

/// Entropy: `n H(Σ T_{α_i} X_i) − Σ_j α^{(j)} H(Σ_{i≠j} T_{α_i/α^{(j)}} X_i)`.
/// Relative entropy: `Σ_j α^{(j)} D(…) − n D(Σ T_{α_i} X_i)`.
/// Here `α^{(j)} = 1 − α_j` and `D(Y) = D(P_Y ‖ Π_{λ_Y})`. Both are expected
/// to be nonnegative.
pub fn leave_one_out_gap<T: Real>(inst: &LeaveOneOutInstance<T>) -> Result<T> {
    let f = |p: &Pmf<T>| -> Result<T> {
        match inst.kind {
            LeaveOneOutKind::Entropy => Ok(entropy(p)),
            LeaveOneOutKind::RelativeEntropy => poisson_divergence(p),
        }
    };
    if inst.kind == LeaveOneOutKind::Entropy {
        if let Some(index) = inst.pmfs.iter().position(|p| !ulc_check(p)) {
            return Err(Error::NotUlc { index });
        }
    }
    let n = T::from_usize_lossy(inst.pmfs.len() - 1);
    let full = n * f(&thinned_sum(&inst.pmfs, &inst.alphas, None)?)?;
    let mut parts = T::zero();
    for j in 0..inst.pmfs.len() {
        let w = T::one() - inst.alphas[j];
        parts += w * f(&thinned_sum(&inst.pmfs, &inst.alphas, Some(j))?)?;
    }
    Ok(match inst.kind {
        LeaveOneOutKind::Entropy => full - parts,
        LeaveOneOutKind::RelativeEntropy => parts - full,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    use super::*;
    use crate::sample::{random_nondegenerate, random_pmf, random_ulc, trial_rng};

    #[test]
    fn maxent_examples() {
        let pois = Pmf::from_family(crate::Family::Poisson { lambda: 1.3f64 }, 1e-14).unwrap();
        let g = maxent_gap(&pois).unwrap();
        assert!(
            g.gap.abs() <= 1e-12 && g.hypothesis == Hypothesis::Ulc,
            "{g:?}"
        );

        let g = maxent_gap(&Pmf::bernoulli(0.5).unwrap()).unwrap();
        // Oracle: H(Π_{1/2}) by direct summation.
        let mut m = (-0.5f64).exp();
        let mut h = 0.0;
        for k in 0..60 {
            if m > 0.0 {
                h -= m * m.ln();
            }
            m *= 0.5 / (k + 1) as f64;
        }
        assert_abs_diff_eq!(g.poisson_entropy, h, epsilon = 1e-13);
        assert!(g.gap > 0.0 && g.hypothesis == Hypothesis::Ulc);
        assert!(matches!(
            maxent_gap(&Pmf::<f64>::point(0)),
            Err(Error::ZeroMean)
        ));
    }

    #[test]
    fn maxent_under_stochastic_order() {
        let mut found = 0;
        for i in 0..4000 {
            let mut rng = trial_rng(6, "maxent-st", i);
            let p: Pmf<f64> = random_nondegenerate(&mut rng, 6);
            let g = maxent_gap(&p).unwrap();
            if g.hypothesis == Hypothesis::SizeBiasSt {
                found += 1;
                assert!(g.gap >= -1e-10, "{:?}", p.probs());
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn maxent_on_random_ulc() {
        for i in 0..300 {
            let mut rng = trial_rng(6, "maxent-ulc", i);
            let p: Pmf<f64> = random_ulc(&mut rng, 12);
            if p.mean() == 0.0 {
                continue;
            }
            assert!(maxent_gap(&p).unwrap().gap >= -1e-10);
        }
    }

    #[test]
    fn poisson_is_a_fixed_point() {
        let pois = Pmf::from_family(crate::Family::Poisson { lambda: 0.8f64 }, 1e-14).unwrap();
        let seq = thin_law_sequences(&pois, 5).unwrap();
        for r in &seq {
            assert!(r.d_n <= 1e-10);
            assert!((r.h_n - seq[0].h_n).abs() <= 1e-10);
        }
    }

    #[test]
    fn monotone_sequences() {
        let seq = thin_law_sequences(&Pmf::bernoulli(0.6).unwrap(), 6).unwrap();
        assert!(seq.windows(2).all(|w| w[1].d_n <= w[0].d_n + 1e-12));
        let seq = thin_law_sequences(&Pmf::binomial(3, 0.3).unwrap(), 6).unwrap();
        assert!(seq.windows(2).all(|w| w[1].h_n >= w[0].h_n - 1e-12));
        assert!(thin_law_sequences(&Pmf::bernoulli(0.6).unwrap(), 1).is_err());
    }

    #[test]
    fn two_bernoulli_entropy_case() {
        for i in 1..10 {
            let a = i as f64 / 10.0;
            let inst = LeaveOneOutInstance::new(
                vec![Pmf::bernoulli(0.3).unwrap(), Pmf::bernoulli(0.8).unwrap()],
                vec![a, 1.0 - a],
                LeaveOneOutKind::Entropy,
            )
            .unwrap();
            let gap = leave_one_out_gap(&inst).unwrap();
            // n = 1: H(T_a X₁ + T_{1−a} X₂) − a H(X₁) − (1−a) H(X₂)
            let law = thin(&inst.pmfs[0], a)
                .unwrap()
                .convolve(&thin(&inst.pmfs[1], 1.0 - a).unwrap());
            let direct =
                entropy(&law) - a * entropy(&inst.pmfs[0]) - (1.0 - a) * entropy(&inst.pmfs[1]);
            assert_abs_diff_eq!(gap, direct, epsilon = 1e-14);
            assert!(gap >= -1e-10);
        }
    }

    #[test]
    fn iid_equal_weights_match_sequences() {
        let p = Pmf::binomial(2, 0.4).unwrap();
        let seq = thin_law_sequences(&p, 4).unwrap();
        let inst =
            LeaveOneOutInstance::new(vec![p.clone(); 4], vec![0.25; 4], LeaveOneOutKind::Entropy)
                .unwrap();
        let gap = leave_one_out_gap(&inst).unwrap();
        assert_abs_diff_eq!(gap, 3.0 * (seq[3].h_n - seq[2].h_n), epsilon = 1e-12);
    }

    #[test]
    fn three_fair_coins_relative_entropy() {
        let b = Pmf::bernoulli(0.5).unwrap();
        let third = 1.0 / 3.0;
        let inst = LeaveOneOutInstance::new(
            vec![b.clone(), b.clone(), b],
            vec![third, third, 1.0 - 2.0 * third],
            LeaveOneOutKind::RelativeEntropy,
        )
        .unwrap();
        assert!(leave_one_out_gap(&inst).unwrap() >= -1e-10);
    }

    #[test]
    fn instance_validation() {
        let b = Pmf::bernoulli(0.5).unwrap();
        assert!(
            LeaveOneOutInstance::new(vec![b.clone()], vec![1.0], LeaveOneOutKind::Entropy).is_err()
        );
        assert!(LeaveOneOutInstance::new(
            vec![b.clone(), b.clone()],
            vec![0.5, 0.6],
            LeaveOneOutKind::Entropy
        )
        .is_err());
        let geo = Pmf::from_family(crate::Family::Geometric { p: 0.5 }, 1e-12).unwrap();
        let inst = LeaveOneOutInstance::new(vec![b, geo], vec![0.5, 0.5], LeaveOneOutKind::Entropy)
            .unwrap();
        assert!(matches!(
            leave_one_out_gap(&inst),
            Err(Error::NotUlc { index: 1 })
        ));
    }

    #[test]
    fn random_leave_one_out() {
        for i in 0..100 {
            let mut rng = trial_rng(6, "loo", i);
            let k = rng.gen_range(2..=4);
            let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            let mut alphas: Vec<f64> = w.iter().map(|v| v / s).collect();
            let head: f64 = alphas[..k - 1].iter().sum();
            alphas[k - 1] = 1.0 - head;
            let ulc: Vec<Pmf<f64>> = (0..k).map(|_| random_ulc(&mut rng, 12)).collect();
            let any: Vec<Pmf<f64>> = (0..k).map(|_| random_pmf(&mut rng, 12)).collect();
            let e =
                LeaveOneOutInstance::new(ulc, alphas.clone(), LeaveOneOutKind::Entropy).unwrap();
            assert!(leave_one_out_gap(&e).unwrap() >= -1e-10);
            let d =
                LeaveOneOutInstance::new(any, alphas, LeaveOneOutKind::RelativeEntropy).unwrap();
            assert!(leave_one_out_gap(&d).unwrap() >= -1e-10);
        }
    }
}
