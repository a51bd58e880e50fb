//! The verification suites. Every randomized check draws its instances from
//! `trial_rng(master_seed, "<suite>/<check>", index)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{trial_check, Check, InequalityReport, Suite, SuiteConfig, TrialOutcome};
use crate::concentration::{
    bobkov_ledoux_terms, eval_poly, lsi_terms, modified_lsi_gap, orthogonal_polys,
    poincare_bound_clc, poincare_constant, poincare_constant_mixed, OrthoFamily,
};
use crate::error::Result;
use crate::info::{
    binomial_poisson_bound, fisher_subadditivity_gap, johnstone_info, poisson_approx_report,
    poisson_reference, scaled_fisher, scaled_score, FisherKind,
};
use crate::monotonicity::{
    leave_one_out_gap, maxent_gap, thin_law_sequences, Hypothesis, LeaveOneOutInstance,
    LeaveOneOutKind,
};
use crate::pmf::{stochastic_order, ulc_check, Family, OrderKind, Pmf};
use crate::sample::{
    random_log_lipschitz, random_monotone_path, random_nondegenerate, random_path, random_pmf,
    random_tilted, random_ulc,
};
use crate::shepp_olkin::{
    critical_q_search, entropy_profile, find_convexity_witness, key_inequality_slack,
    max_second_difference, monotone_entropy_check, path_pmf_derivatives, EntropyKind, PathSpec,
};
use crate::thinning::{free_energy_path, pde_residual_halving, thin};

type P = Pmf<f64>;

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<InequalityReport> {
    cfg.validate()?;
    let checks = match suite {
        Suite::All => Suite::ALL
            .iter()
            .flat_map(|&s| checks_for(s, cfg))
            .collect(),
        s => checks_for(s, cfg),
    };
    Ok(InequalityReport::assemble(
        suite.name(),
        checks,
        cfg.master_seed,
    ))
}

fn checks_for(suite: Suite, cfg: &SuiteConfig) -> Vec<Check> {
    let ctx = Ctx {
        cfg,
        suite: suite.name(),
    };
    match suite {
        Suite::PoissonApprox => poisson_approx(&ctx),
        Suite::Maxent => maxent(&ctx),
        Suite::Monotonicity => monotonicity(&ctx),
        Suite::Poincare => poincare(&ctx),
        Suite::LogSobolev => log_sobolev(&ctx),
        Suite::SheppOlkin => shepp_olkin(&ctx),
        Suite::All => unreachable!("expanded by run_suite"),
    }
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    suite: &'static str,
}

impl Ctx<'_> {
    fn name(&self, check: &str) -> String {
        format!("{}/{check}", self.suite)
    }

    fn trials(&self, default: usize) -> usize {
        self.cfg.trials_or(default)
    }

    /// A deterministic check evaluated once.
    fn single(
        &self,
        check: &str,
        anchor: &str,
        tolerance: f64,
        slack: f64,
        witness: Value,
    ) -> Check {
        let name = self.name(check);
        let tol = self.cfg.tolerance(&name, tolerance);
        Check::new(&name, anchor, slack, tol, false, Some(witness))
    }

    fn exploratory(&self, check: &str, anchor: &str, slack: f64, witness: Value) -> Check {
        let name = self.name(check);
        Check::new(&name, anchor, slack, 0.0, true, Some(witness))
    }

    fn failed(&self, check: &str, anchor: &str, tolerance: f64, err: crate::Error) -> Check {
        let name = self.name(check);
        Check::new(
            &name,
            anchor,
            f64::NEG_INFINITY,
            tolerance,
            false,
            Some(json!({ "error": err.to_string() })),
        )
    }

    fn random<F>(&self, check: &str, anchor: &str, trials: usize, tolerance: f64, f: F) -> Check
    where
        F: Fn(&mut ChaCha8Rng) -> TrialOutcome + Sync,
    {
        let name = self.name(check);
        trial_check(
            self.cfg,
            &name,
            &name,
            anchor,
            self.trials(trials),
            tolerance,
            false,
            f,
        )
    }

    fn random_exploratory<F>(&self, check: &str, anchor: &str, trials: usize, f: F) -> Check
    where
        F: Fn(&mut ChaCha8Rng) -> TrialOutcome + Sync,
    {
        let name = self.name(check);
        trial_check(
            self.cfg,
            &name,
            &name,
            anchor,
            self.trials(trials),
            0.0,
            true,
            f,
        )
    }

    fn poisson(&self, lambda: f64) -> Result<P> {
        Pmf::from_family(Family::Poisson { lambda }, self.cfg.trunc_tol)
    }
}

/// Smallest slack over a deterministic list, with the argument that attains it.
fn worst<I: IntoIterator<Item = (f64, Value)>>(items: I) -> (f64, Value) {
    items
        .into_iter()
        .fold((f64::INFINITY, Value::Null), |acc, (s, w)| {
            if s < acc.0 || s.is_nan() {
                (s, w)
            } else {
                acc
            }
        })
}

fn collect<T>(items: impl IntoIterator<Item = Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

fn positive_mean(p: &P) -> Option<&P> {
    (p.mean() > 0.0).then_some(p)
}

fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut a: Vec<f64> = w.iter().map(|v| v / s).collect();
    let head: f64 = a[..k - 1].iter().sum();
    a[k - 1] = 1.0 - head;
    a
}

/// Smallest relative margin `1 − (v+1)P(v+1)P(v−1) / (v P(v)²)` over the support.
fn ulc_margin(p: &P) -> f64 {
    (1..p.len())
        .filter(|&v| p.mass(v) > 0.0)
        .map(|v| {
            let lhs = v as f64 * p.mass(v) * p.mass(v);
            1.0 - (v + 1) as f64 * p.mass(v + 1) * p.mass(v - 1) / lhs
        })
        .fold(f64::INFINITY, f64::min)
}

fn poisson_approx(ctx: &Ctx) -> Vec<Check> {
    let mut out = Vec::new();

    let (err, w) = worst((1..100).map(|i| {
        let p = i as f64 / 100.0;
        let k = Pmf::bernoulli(p)
            .and_then(|b| scaled_fisher(&b))
            .unwrap_or(f64::NAN);
        (-(k - p * p / (1.0 - p)).abs(), json!({ "p": p, "k": k }))
    }));
    out.push(ctx.single("bernoulli-k-closed-form", "Example (bern)", 1e-12, err, w));

    // B_{n,λ/n} against Π_λ, λ = 1.
    match collect((2..=50usize).map(|n| {
        Pmf::binomial(n, 1.0 / n as f64).and_then(|b| Ok((n, poisson_approx_report(&b)?)))
    })) {
        Ok(reports) => {
            let (s, w) = worst(reports.iter().map(|(n, r)| {
                (
                    binomial_poisson_bound(*n, 1.0) - r.d_to_poisson,
                    json!({ "n": n, "d": r.d_to_poisson }),
                )
            }));
            out.push(ctx.single(
                "binomial-relative-entropy-bound",
                "Example (bern) with Theorem (bobled)",
                1e-12,
                s,
                w,
            ));
            let (s, w) = worst(
                reports
                    .iter()
                    .map(|(n, r)| (r.k - r.d_to_poisson, json!({ "n": n, "report": r }))),
            );
            out.push(ctx.single("binomial-d-le-k", "Theorem (bobled)", 1e-10, s, w));
            let (s, w) = worst(
                reports
                    .iter()
                    .map(|(n, r)| (r.pinsker_bound - r.tv, json!({ "n": n, "report": r }))),
            );
            out.push(ctx.single("binomial-pinsker", "Pinsker step", 1e-10, s, w));
            // The printed (2+ε)λ/n display, read in the ℓ₁ convention.
            let (s, w) = worst(reports.iter().map(|(n, r)| {
                (
                    2.0 / *n as f64 - 2.0 * r.tv,
                    json!({ "n": n, "tv_l1": 2.0 * r.tv }),
                )
            }));
            out.push(ctx.exploratory("binomial-tv-display", "Pinsker step", s, w));
        }
        Err(e) => out.push(ctx.failed(
            "binomial-relative-entropy-bound",
            "Example (bern)",
            1e-12,
            e,
        )),
    }

    out.push(
        ctx.random("random-ulc-d-le-k", "Theorem (bobled)", 200, 1e-10, |rng| {
            let p: P = random_ulc(rng, 12);
            let Some(p) = positive_mean(&p) else {
                return Ok(None);
            };
            let r = poisson_approx_report(p)?;
            Ok(Some((
                r.k - r.d_to_poisson,
                json!({ "probs": p.probs(), "report": r }),
            )))
        }),
    );
    out.push(
        ctx.random("random-ulc-pinsker", "Pinsker step", 200, 1e-10, |rng| {
            let p: P = random_ulc(rng, 12);
            let Some(p) = positive_mean(&p) else {
                return Ok(None);
            };
            let r = poisson_approx_report(p)?;
            Ok(Some((
                r.pinsker_bound - r.tv,
                json!({ "probs": p.probs(), "report": r }),
            )))
        }),
    );

    out.push(ctx.random(
        "scaled-fisher-subadditivity",
        "Theorem (khj)",
        500,
        1e-10,
        |rng| {
            let k = rng.gen_range(1..=4);
            let ps: Vec<P> = (0..k)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        random_ulc(rng, 12)
                    } else {
                        random_pmf(rng, 12)
                    }
                })
                .collect();
            if ps.iter().all(|p| p.mean() == 0.0) {
                return Ok(None);
            }
            let gap = fisher_subadditivity_gap(&ps, FisherKind::ScaledK)?;
            Ok(Some((
                gap,
                json!({ "laws": ps.iter().map(|p| p.probs().to_vec()).collect::<Vec<_>>() }),
            )))
        },
    ));

    let eq = collect([0.5, 1.0, 2.0, 5.0].iter().map(|&a| {
        let p = ctx.poisson(a)?;
        let gap = fisher_subadditivity_gap(&[p.clone(), p], FisherKind::JohnstoneI)?;
        Ok((-gap.abs(), json!({ "lambda": a, "gap": gap })))
    }));
    match eq {
        Ok(v) => {
            let (s, w) = worst(v);
            out.push(ctx.single(
                "johnstone-subadditivity-poisson-equality",
                "Johnstone subadditivity",
                1e-8,
                s,
                w,
            ));
        }
        Err(e) => out.push(ctx.failed(
            "johnstone-subadditivity-poisson-equality",
            "Johnstone subadditivity",
            1e-8,
            e,
        )),
    }

    let tol = ctx.cfg.trunc_tol;
    out.push(
        ctx.random(
            "johnstone-cramer-rao",
            "Cramér–Rao bound for I(P)",
            200,
            1e-8,
            |rng| {
                let fam = random_tilted(rng);
                let p = Pmf::from_family(fam.clone(), tol)?;
                let info = johnstone_info(&p);
                Ok(Some((
                    info - 1.0 / p.variance(),
                    json!({ "family": fam.tag(), "info": info }),
                )))
            },
        )
        .with_budget(tol),
    );

    out.push(
        ctx.random("score-zero-mean", "Def. (khj)", 200, 1e-10, |rng| {
            let p: P = random_pmf(rng, 12);
            let Some(p) = positive_mean(&p) else {
                return Ok(None);
            };
            let s = scaled_score(p)?;
            let m: f64 = p.probs().iter().zip(&s.rho).map(|(a, b)| a * b).sum();
            Ok(Some((-m.abs(), json!({ "probs": p.probs() }))))
        }),
    );
    out
}

fn maxent(ctx: &Ctx) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(
        ctx.random("maxent-ulc", "Theorem (maxent)", 1000, 1e-10, |rng| {
            let p: P = random_ulc(rng, 12);
            let Some(p) = positive_mean(&p) else {
                return Ok(None);
            };
            let g = maxent_gap(p)?;
            Ok(Some((g.gap, json!({ "probs": p.probs(), "gap": g }))))
        }),
    );
    out.push(ctx.random(
        "maxent-size-bias-st",
        "Daly remark on Theorem (maxent)",
        2000,
        1e-10,
        |rng| {
            let p: P = random_nondegenerate(rng, 6);
            let g = maxent_gap(&p)?;
            if g.hypothesis != Hypothesis::SizeBiasSt {
                return Ok(None);
            }
            Ok(Some((g.gap, json!({ "probs": p.probs(), "gap": g }))))
        },
    ));

    let eq_tol = 1e-10_f64.max(50.0 * ctx.cfg.trunc_tol);
    match collect([0.5, 1.0, 2.0, 5.0].iter().map(|&l| {
        let g = maxent_gap(&ctx.poisson(l)?)?;
        Ok((-g.gap.abs(), json!({ "lambda": l, "gap": g.gap })))
    })) {
        Ok(v) => {
            let (s, w) = worst(v);
            out.push(
                ctx.single("maxent-poisson-equality", "Theorem (maxent)", eq_tol, s, w)
                    .with_budget(ctx.cfg.trunc_tol),
            );
        }
        Err(e) => out.push(ctx.failed("maxent-poisson-equality", "Theorem (maxent)", eq_tol, e)),
    }

    let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    let path_of =
        |rng: &mut ChaCha8Rng| -> Result<Option<(P, crate::thinning::FreeEnergyPath<f64>)>> {
            let p: P = random_ulc(rng, 12);
            if p.mean() == 0.0 {
                return Ok(None);
            }
            let path = free_energy_path(&p, &grid)?;
            Ok(Some((p, path)))
        };
    out.push(ctx.random(
        "free-energy-nonincreasing",
        "Theorem (maxent) proof",
        200,
        1e-10,
        |rng| {
            let Some((p, path)) = path_of(rng)? else {
                return Ok(None);
            };
            let mut prev = path.lambda_at_zero;
            let mut slack = f64::INFINITY;
            for pt in &path.points {
                slack = slack.min(prev - pt.lambda_val);
                prev = pt.lambda_val;
            }
            Ok(Some((slack, json!({ "probs": p.probs() }))))
        },
    ));
    out.push(ctx.random(
        "free-energy-derivative-sign",
        "Eq. (derivative)",
        200,
        1e-10,
        |rng| {
            let Some((p, path)) = path_of(rng)? else {
                return Ok(None);
            };
            let (s, at) = path
                .points
                .iter()
                .map(|pt| (-pt.deriv_cov, pt.alpha))
                .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
            Ok(Some((s, json!({ "probs": p.probs(), "alpha": at }))))
        },
    ));
    out.push(ctx.random(
        "free-energy-derivative-forms-agree",
        "Eq. (derivative)",
        200,
        1e-6,
        |rng| {
            let Some((p, path)) = path_of(rng)? else {
                return Ok(None);
            };
            let err = path
                .points
                .iter()
                .map(|pt| (pt.deriv_cov - pt.deriv_fd).abs())
                .fold(0.0, f64::max);
            Ok(Some((-err, json!({ "probs": p.probs() }))))
        },
    ));

    out.push(ctx.random(
        "interpolation-pde-residual",
        "Lemma (heateqn2)",
        100,
        1e-6,
        |rng| {
            let p: P = random_nondegenerate(rng, 10);
            let alpha = rng.gen_range(0.1..0.9);
            let r = pde_residual_halving(&p, alpha, 1e-4)?;
            Ok(Some((
                -r.coarse,
                json!({ "probs": p.probs(), "alpha": alpha, "residual": r }),
            )))
        },
    ));
    out.push(ctx.random(
        "interpolation-step-halving",
        "Lemma (heateqn2)",
        100,
        0.0,
        |rng| {
            let p: P = random_nondegenerate(rng, 10);
            let alpha = rng.gen_range(0.1..0.9);
            let r = pde_residual_halving(&p, alpha, 1e-4)?;
            // Below this the residual is rounding noise and the ratio carries no information.
            if r.coarse < 1e-11 {
                return Ok(None);
            }
            let s = (r.ratio - 3.5).min(4.5 - r.ratio);
            Ok(Some((
                s,
                json!({ "probs": p.probs(), "alpha": alpha, "residual": r }),
            )))
        },
    ));
    out
}

fn monotonicity(ctx: &Ctx) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(ctx.random(
        "thin-sequence-relative-entropy",
        "Theorem (yuiid)",
        200,
        1e-10,
        |rng| {
            let p: P = random_nondegenerate(rng, 12);
            let seq = thin_law_sequences(&p, 6)?;
            let s = seq
                .windows(2)
                .map(|w| w[0].d_n - w[1].d_n)
                .fold(f64::INFINITY, f64::min);
            Ok(Some((s, json!({ "probs": p.probs(), "sequence": seq }))))
        },
    ));
    out.push(ctx.random(
        "thin-sequence-entropy",
        "Theorem (yuiid)",
        200,
        1e-10,
        |rng| {
            let p: P = random_ulc(rng, 12);
            let Some(p) = positive_mean(&p) else {
                return Ok(None);
            };
            let seq = thin_law_sequences(p, 6)?;
            let s = seq
                .windows(2)
                .map(|w| w[1].h_n - w[0].h_n)
                .fold(f64::INFINITY, f64::min);
            Ok(Some((s, json!({ "probs": p.probs(), "sequence": seq }))))
        },
    ));
    let loo = |kind: LeaveOneOutKind| {
        move |rng: &mut ChaCha8Rng| -> TrialOutcome {
            let k = rng.gen_range(2..=4);
            let alphas = random_weights(rng, k);
            let pmfs: Vec<P> = (0..k)
                .map(|_| match kind {
                    LeaveOneOutKind::Entropy => random_ulc(rng, 12),
                    LeaveOneOutKind::RelativeEntropy => random_pmf(rng, 12),
                })
                .collect();
            let inst = LeaveOneOutInstance::new(pmfs, alphas, kind)?;
            let gap = leave_one_out_gap(&inst)?;
            let laws: Vec<Vec<f64>> = inst.pmfs().iter().map(|p| p.probs().to_vec()).collect();
            Ok(Some((
                gap,
                json!({ "laws": laws, "alphas": inst.alphas() }),
            )))
        }
    };
    out.push(ctx.random(
        "leave-one-out-entropy",
        "Theorem (hmon)",
        300,
        1e-10,
        loo(LeaveOneOutKind::Entropy),
    ));
    out.push(ctx.random(
        "leave-one-out-relative-entropy",
        "Theorem (yugeneral)",
        300,
        1e-10,
        loo(LeaveOneOutKind::RelativeEntropy),
    ));

    let fixed = collect([0.5, 1.0, 3.0].iter().map(|&l| {
        let p: P = Pmf::from_family(Family::Poisson { lambda: l }, 1e-15)?;
        let seq = thin_law_sequences(&p, 6)?;
        let dev = seq
            .iter()
            .map(|r| r.d_n.abs().max((r.h_n - seq[0].h_n).abs()))
            .fold(0.0, f64::max);
        let inst = LeaveOneOutInstance::new(
            vec![p.clone(), p.clone(), p],
            vec![0.2, 0.3, 0.5],
            LeaveOneOutKind::Entropy,
        )?;
        let g = leave_one_out_gap(&inst)?;
        let lhs = if g.is_finite() {
            dev.max(0.0)
        } else {
            f64::INFINITY
        };
        Ok((
            -lhs,
            json!({ "lambda": l, "sequence": seq, "leave_one_out_gap": g }),
        ))
    }));
    match fixed {
        Ok(v) => {
            let (s, w) = worst(v);
            out.push(
                ctx.single("poisson-fixed-point", "Theorem (yuiid)", 1e-10, s, w)
                    .with_budget(1e-15),
            );
        }
        Err(e) => out.push(ctx.failed("poisson-fixed-point", "Theorem (yuiid)", 1e-10, e)),
    }

    out.push(ctx.random(
        "thinning-preserves-ulc",
        "Condition (ULC) under thinning",
        500,
        1e-14,
        |rng| {
            let p: P = random_ulc(rng, 12);
            let alpha = rng.gen_range(0.0..=1.0);
            let t = thin(&p, alpha)?;
            Ok(Some((
                ulc_margin(&t),
                json!({ "probs": p.probs(), "alpha": alpha }),
            )))
        },
    ));
    out.push(ctx.random(
        "convolution-preserves-ulc",
        "Condition (ULC) under convolution",
        500,
        1e-14,
        |rng| {
            let p: P = random_ulc(rng, 12);
            let q: P = random_ulc(rng, 12);
            let c = p.convolve(&q);
            let ok = ulc_check(&c);
            let m = ulc_margin(&c);
            Ok(Some((
                if ok { m.max(0.0) } else { m },
                json!({ "p": p.probs(), "q": q.probs() }),
            )))
        },
    ));
    out
}

fn poincare(ctx: &Ctx) -> Vec<Check> {
    let mut out = Vec::new();
    let kl = collect([0.5, 1.0, 2.0, 5.0].iter().map(|&l| {
        let p = ctx.poisson(l)?;
        let r = poincare_constant(&p)?.constant;
        Ok((
            -(r - l).abs() / l,
            json!({ "lambda": l, "constant": r, "support_end": p.support_end() }),
        ))
    }));
    match kl {
        Ok(v) => {
            let (s, w) = worst(v);
            out.push(
                ctx.single("klaassen-poisson", "Example (klaassen)", 1e-3, s, w)
                    .with_budget(ctx.cfg.trunc_tol),
            );
        }
        Err(e) => out.push(ctx.failed("klaassen-poisson", "Example (klaassen)", 1e-3, e)),
    }

    let (s, w) = worst((1..100).map(|i| {
        let p = i as f64 / 100.0;
        let r = Pmf::bernoulli(p)
            .and_then(|b| poincare_constant(&b))
            .map(|e| e.constant)
            .unwrap_or(f64::NAN);
        (-(r - p).abs(), json!({ "p": p, "constant": r }))
    }));
    out.push(ctx.single("bernoulli-closed-form", "Def. (poindisc)", 1e-9, s, w));

    out.push(
        ctx.random("daly-sandwich", "Theorem (daly)", 500, 1e-9, |rng| {
            let p: P = random_ulc(rng, 12);
            if p.support_end() == 0 {
                return Ok(None);
            }
            let r = poincare_constant(&p)?.constant;
            let (mean, var) = p.moments();
            Ok(Some((
                (r - var).min(mean - r),
                json!({ "probs": p.probs(), "constant": r }),
            )))
        }),
    );

    let tol = ctx.cfg.trunc_tol;
    out.push(
        ctx.random(
            "clc-poincare-tilted",
            "Theorem (poincare)",
            200,
            1e-6,
            |rng| {
                let fam = random_tilted(rng);
                let p = Pmf::from_family(fam.clone(), tol)?;
                let r = poincare_bound_clc(&p)?;
                Ok(Some((
                    r.bound - r.estimate.constant,
                    json!({ "family": fam.tag(), "c": r.c, "constant": r.estimate.constant }),
                )))
            },
        )
        .with_budget(tol),
    );

    let conv: Result<Vec<f64>> = collect([1e-6, 1e-9, 1e-12].iter().map(|&t| {
        Pmf::from_family(Family::Poisson { lambda: 2.0 }, t)
            .and_then(|p| poincare_constant(&p))
            .map(|e| e.constant)
    }));
    match conv {
        Ok(v) => {
            let s = (v[1] - v[0]).min(v[2] - v[1]).min(2.0 - v[2]);
            out.push(ctx.single(
                "poisson-truncation-convergence",
                "Example (klaassen)",
                1e-12,
                s,
                json!({ "constants": v }),
            ));
        }
        Err(e) => out.push(ctx.failed(
            "poisson-truncation-convergence",
            "Example (klaassen)",
            1e-12,
            e,
        )),
    }

    let mixed = collect(
        [(2usize, 0.5), (5, 0.4), (5, 0.1), (10, 0.3), (20, 0.5)]
            .iter()
            .map(|&(n, p)| {
                let b = Pmf::binomial(n, p)?;
                let est = poincare_constant_mixed(&b, n)?;
                let var = n as f64 * p * (1.0 - p);
                Ok((
                    est.constant - var,
                    json!({ "n": n, "p": p, "constant": est.constant, "linear_witness": var }),
                ))
            }),
    );
    match mixed {
        Ok(v) => {
            let all: Vec<Value> = v.iter().map(|(_, w)| w.clone()).collect();
            let s = v.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
            out.push(ctx.exploratory(
                "mixed-derivative-binomial",
                "Eq. (nablamixed)",
                s,
                json!({ "instances": all }),
            ));
        }
        Err(e) => out.push(ctx.exploratory(
            "mixed-derivative-binomial",
            "Eq. (nablamixed)",
            f64::NEG_INFINITY,
            json!({ "error": e.to_string() }),
        )),
    }

    let ortho =
        |family: OrthoFamily<f64>, weight: Result<P>, degree: usize| -> Result<(f64, Value)> {
            let w = weight?;
            let table = orthogonal_polys(family, degree)?;
            let ip = |a: &[f64], b: &[f64]| -> f64 {
                (0..w.len())
                    .map(|x| w.mass(x) * eval_poly(a, x as f64) * eval_poly(b, x as f64))
                    .sum()
            };
            let mut worst_c: f64 = 0.0;
            for i in 0..table.len() {
                for j in 0..i {
                    let c = ip(&table[i], &table[j])
                        / (ip(&table[i], &table[i]) * ip(&table[j], &table[j])).sqrt();
                    worst_c = worst_c.max(c.abs());
                }
            }
            Ok((
                -worst_c,
                json!({ "max_degree": degree, "max_normalized_inner_product": worst_c }),
            ))
        };
    for (label, fam, weight, degree) in [
        (
            "charlier-orthogonality",
            OrthoFamily::Charlier { lambda: 2.0 },
            Pmf::from_family(Family::Poisson { lambda: 2.0 }, 1e-28),
            6,
        ),
        (
            "krawtchouk-orthogonality",
            OrthoFamily::Krawtchouk { n: 8, p: 0.3 },
            Pmf::binomial(8, 0.3),
            8,
        ),
    ] {
        match ortho(fam, weight, degree) {
            Ok((s, w)) => out.push(ctx.single(label, "Charlier/Krawtchouk remarks", 1e-10, s, w)),
            Err(e) => out.push(ctx.failed(label, "Charlier/Krawtchouk remarks", 1e-10, e)),
        }
    }
    out
}

fn log_sobolev(ctx: &Ctx) -> Vec<Check> {
    let mut out = Vec::new();
    let tol = ctx.cfg.trunc_tol;
    out.push(
        ctx.random("bobkov-ledoux", "Theorem (bobled)", 200, 1e-10, |rng| {
            let lambda = rng.gen_range(0.2..5.0);
            let len = poisson_reference(lambda)?.len() + 1;
            let lip = rng.gen_range(0.05..1.0);
            let f: Vec<f64> = random_log_lipschitz(rng, len, lip);
            let t = bobkov_ledoux_terms(lambda, &f, tol)?;
            Ok(Some((
                t.gap,
                json!({ "lambda": lambda, "f": f, "terms": t }),
            )))
        })
        .with_budget(tol),
    );
    out.push(ctx.random(
        "bobkov-ledoux-fisher-identity",
        "Theorem (bobled) with f = P/Π",
        50,
        1e-10,
        |rng| {
            let fam = random_tilted(rng);
            let p = Pmf::from_family(fam.clone(), 1e-14)?;
            let lambda = p.mean();
            let pois = Pmf::from_family(Family::Poisson { lambda }, 1e-14)?;
            let f: Vec<f64> = (0..pois.len().max(p.len()) + 1)
                .map(|x| p.mass_ext(x) / pois.mass_ext(x))
                .collect();
            let t = bobkov_ledoux_terms(lambda, &f, 1e-14)?;
            let k = scaled_fisher(&p)?;
            Ok(Some((
                -(t.rhs - k).abs(),
                json!({ "family": fam.tag(), "rhs": t.rhs, "k": k }),
            )))
        },
    ));
    out.push(
        ctx.random("modified-lsi-tilted", "Theorem (lsi)", 200, 1e-10, |rng| {
            let fam = random_tilted(rng);
            let p = Pmf::from_family(fam.clone(), tol)?;
            let lip = rng.gen_range(0.05..1.0);
            let f: Vec<f64> = random_log_lipschitz(rng, p.len() + 1, lip);
            let g = modified_lsi_gap(&p, &f)?;
            Ok(Some((
                g.gap,
                json!({ "family": fam.tag(), "f": f, "gap": g }),
            )))
        })
        .with_budget(tol),
    );
    out.push(ctx.random(
        "lsi-tightens-bobkov-ledoux",
        "Theorem (lsi) tightening remark",
        100,
        1e-12,
        |rng| {
            let lambda = rng.gen_range(0.2..5.0);
            let pois = Pmf::from_family(Family::Poisson { lambda }, tol)?;
            let lip = rng.gen_range(0.05..1.5);
            let f: Vec<f64> = random_log_lipschitz(rng, pois.len() + 1, lip);
            let lsi = lsi_terms(&pois, lambda, &f)?;
            let bl = bobkov_ledoux_terms(lambda, &f, tol)?;
            Ok(Some((
                bl.rhs - lsi.rhs,
                json!({ "lambda": lambda, "lsi_rhs": lsi.rhs, "bobled_rhs": bl.rhs }),
            )))
        },
    ));
    out.push(ctx.random_exploratory(
        "lsi-under-size-bias-order",
        "Open problem: log-Sobolev under P* ≤st P",
        500,
        |rng| {
            let p: P = random_nondegenerate(rng, 8);
            if ulc_check(&p) || !stochastic_order(&p, &p.size_bias()?, OrderKind::Stochastic)? {
                return Ok(None);
            }
            let lip = rng.gen_range(0.05..1.0);
            let f: Vec<f64> = random_log_lipschitz(rng, p.len() + 1, lip);
            let t = lsi_terms(&p, p.mean(), &f)?;
            Ok(Some((
                t.gap,
                json!({ "probs": p.probs(), "f": f, "constant": p.mean(), "terms": t }),
            )))
        },
    ));
    out
}

fn tsallis_root() -> f64 {
    let f = |q: f64| 2.0 - 4.0 * q + 2f64.powf(q);
    let (mut lo, mut hi) = (3.0, 4.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn shepp_olkin(ctx: &Ctx) -> Vec<Check> {
    let mut out = Vec::new();
    let max_m = ctx.cfg.max_m;
    let grid = ctx.cfg.grid_size.unwrap_or(101);
    out.push(
        ctx.random("shannon-concavity", "Theorem (SO)", 500, 1e-8, |rng| {
            let m = rng.gen_range(1..=max_m);
            let path: PathSpec<f64> = random_path(rng, m);
            let prof = entropy_profile(&path, grid, EntropyKind::Shannon, 1.0)?;
            let (t, d) = max_second_difference(&prof).unwrap_or((0.0, 0.0));
            Ok(Some((-d, json!({ "path": path, "t": t }))))
        }),
    );
    let key = |monotone: bool| {
        move |rng: &mut ChaCha8Rng| -> TrialOutcome {
            let m = rng.gen_range(1..=max_m);
            let path: PathSpec<f64> = if monotone {
                random_monotone_path(rng, m)
            } else {
                random_path(rng, m)
            };
            let mut best = (f64::INFINITY, 0.0, 0usize);
            for j in 1..10 {
                let t = j as f64 / 10.0;
                let k = key_inequality_slack(&path, t)?;
                if k.min_slack < best.0 {
                    best = (k.min_slack, t, k.argmin_k);
                }
            }
            Ok(Some((
                best.0,
                json!({ "path": path, "t": best.1, "k": best.2, "f": "P_p(t)" }),
            )))
        }
    };
    out.push(ctx.random("key-inequality-monotone", "Eq. (key)", 200, 1e-9, key(true)));
    out.push(ctx.random_exploratory("key-inequality-non-monotone", "Eq. (key)", 200, key(false)));
    out.push(ctx.random(
        "gradient-form-residuals",
        "Gradient forms of dP/dt and d2P/dt2",
        100,
        1e-6,
        |rng| {
            let m = rng.gen_range(1..=max_m);
            let path: PathSpec<f64> = random_path(rng, m);
            let t = rng.gen_range(0.05..0.95);
            let d = path_pmf_derivatives(&path, t)?;
            Ok(Some((
                -d.fd_residual_1.max(d.fd_residual_2),
                json!({ "path": path, "t": t }),
            )))
        },
    ));
    out.push(
        ctx.random("permutation-invariance", "Theorem (SO)", 50, 1e-12, |rng| {
            let m = rng.gen_range(2..=max_m.max(2));
            let path: PathSpec<f64> = random_path(rng, m);
            let perm: Vec<usize> = (0..m).rev().collect();
            let other = path.permute(&perm)?;
            let a = entropy_profile(&path, 21, EntropyKind::Shannon, 1.0)?;
            let b = entropy_profile(&other, 21, EntropyKind::Shannon, 1.0)?;
            let dev = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x.value - y.value).abs())
                .fold(0.0, f64::max);
            Ok(Some((-dev, json!({ "path": path }))))
        }),
    );

    let root = tsallis_root();
    let at = 2.0 - 4.0 * 3.65986 + 2f64.powf(3.65986);
    out.push(ctx.single(
        "tsallis-critical-root",
        "Generalized Shepp–Olkin conjecture",
        1e-3,
        -at.abs(),
        json!({ "root": root, "residual_at_3.65986": at }),
    ));

    let trials = ctx.trials(200);
    let seed = ctx.cfg.master_seed;
    for (label, kind, q) in [
        ("renyi-q1.5-witness-search", EntropyKind::Renyi, 1.5),
        ("tsallis-q2-witness-search", EntropyKind::Tsallis, 2.0),
        ("tsallis-q4-witness-search", EntropyKind::Tsallis, 4.0),
    ] {
        let found = find_convexity_witness::<f64>(kind, q, 2, trials, seed);
        let (s, w) = match found {
            Ok(Some(w)) => (
                -w.second_difference,
                json!({ "witness": w, "trials": trials }),
            ),
            Ok(None) => (0.0, json!({ "witness": null, "trials": trials })),
            Err(e) => (f64::NEG_INFINITY, json!({ "error": e.to_string() })),
        };
        out.push(ctx.exploratory(label, "Generalized Shepp–Olkin conjecture", s, w));
    }
    for (label, kind) in [
        ("critical-q-renyi", EntropyKind::Renyi),
        ("critical-q-tsallis", EntropyKind::Tsallis),
    ] {
        let (s, w) = match critical_q_search::<f64>(kind, 2, trials, seed) {
            Ok(r) => (0.0, json!(r)),
            Err(e) => (f64::NEG_INFINITY, json!({ "error": e.to_string() })),
        };
        out.push(ctx.exploratory(label, "Generalized Shepp–Olkin conjecture", s, w));
    }
    let mono_trials = ctx.trials(500);
    let mut reports = Vec::new();
    let mut violations = 0usize;
    for m in 1..=3 {
        match monotone_entropy_check::<f64>(m, mono_trials, seed) {
            Ok(r) => {
                violations += r.violations.len();
                reports.push(json!(r));
            }
            Err(e) => reports.push(json!({ "m": m, "error": e.to_string() })),
        }
    }
    out.push(ctx.exploratory(
        "monotone-entropy",
        "Monotone entropy conjecture",
        -(violations as f64),
        json!({ "reports": reports }),
    ));
    out
}
