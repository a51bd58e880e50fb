//! Suite orchestration: configuration, check records and report persistence.

mod suites;

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::sample::trial_rng;

pub use suites::run_suite;

/// Reproducibility envelope for a suite run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub master_seed: u64,
    pub trunc_tol: f64,
    /// Overrides every randomized check's own trial count when set.
    pub trials: Option<usize>,
    /// Overrides the profile grid size when set.
    pub grid_size: Option<usize>,
    /// Largest number of Bernoulli coordinates in path suites.
    pub max_m: usize,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            trunc_tol: 1e-12,
            trials: None,
            grid_size: None,
            max_m: 8,
            tolerance_overrides: BTreeMap::new(),
            output_path: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.trunc_tol > 0.0 && self.trunc_tol <= 1e-3) {
            return Err(Error::Config(format!(
                "tol = {} outside (0, 1e-3]",
                self.trunc_tol
            )));
        }
        if let Some(g) = self.grid_size {
            if g < 5 {
                return Err(Error::Config(format!("grid = {g} < 5")));
            }
        }
        if self.max_m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if let Some((k, v)) = self
            .tolerance_overrides
            .iter()
            .find(|(_, &v)| !(v > 0.0 && v.is_finite()))
        {
            return Err(Error::Config(format!(
                "tolerance override {k} = {v} is not positive"
            )));
        }
        Ok(())
    }

    fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerance_overrides
            .get(name)
            .copied()
            .unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Exploratory,
}

/// One verified inequality. `slack` is the margin by which it holds; a hard
/// check fails when `slack < −tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub paper_anchor: String,
    pub status: Status,
    pub slack: f64,
    pub tolerance: f64,
    pub witness: Option<Value>,
    #[serde(skip)]
    pub(crate) budget: f64,
}

impl Check {
    fn new(
        name: &str,
        anchor: &str,
        slack: f64,
        tolerance: f64,
        exploratory: bool,
        witness: Option<Value>,
    ) -> Self {
        let status = if exploratory {
            Status::Exploratory
        } else if slack >= -tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name: name.into(),
            paper_anchor: anchor.into(),
            status,
            slack,
            tolerance,
            witness,
            budget: 0.0,
        }
    }

    fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub error_budget: f64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl InequalityReport {
    pub(crate) fn assemble(suite: &str, mut checks: Vec<Check>, seed: u64) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let error_budget = checks.iter().map(|c| c.budget).fold(0.0, f64::max);
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            suite: suite.into(),
            checks,
            seed,
            error_budget,
            timestamp,
        }
    }

    /// Whether any non-exploratory check failed.
    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends the report as one JSON line.
    pub fn append_to(&self, path: &Path) -> std::io::Result<()> {
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let line = serde_json::to_string(self).map_err(std::io::Error::other)?;
        writeln!(file, "{line}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    PoissonApprox,
    Maxent,
    Monotonicity,
    Poincare,
    LogSobolev,
    SheppOlkin,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::PoissonApprox,
        Suite::Maxent,
        Suite::Monotonicity,
        Suite::Poincare,
        Suite::LogSobolev,
        Suite::SheppOlkin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PoissonApprox => "poisson-approx",
            Suite::Maxent => "maxent",
            Suite::Monotonicity => "monotonicity",
            Suite::Poincare => "poincare",
            Suite::LogSobolev => "log-sobolev",
            Suite::SheppOlkin => "shepp-olkin",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Outcome of one randomized trial: `None` skips the instance.
pub(crate) type TrialOutcome = Result<Option<(f64, Value)>>;

/// Runs `trials` instances in parallel and keeps the smallest slack (the
/// lowest trial index on ties) together with its witness.
#[allow(clippy::too_many_arguments)]
pub(crate) fn trial_check<F>(
    cfg: &SuiteConfig,
    stream: &str,
    name: &str,
    anchor: &str,
    trials: usize,
    tolerance: f64,
    exploratory: bool,
    f: F,
) -> Check
where
    F: Fn(&mut ChaCha8Rng) -> TrialOutcome + Sync,
{
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.master_seed, stream, i);
            f(&mut rng)
        })
        .collect();
    let tolerance = cfg.tolerance(name, tolerance);
    let mut evaluated = 0usize;
    let mut worst: Option<(u64, f64, Value)> = None;
    for (i, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(None) => {}
            Ok(Some((slack, w))) => {
                evaluated += 1;
                if worst
                    .as_ref()
                    .is_none_or(|(_, s, _)| slack < *s || slack.is_nan())
                {
                    worst = Some((i as u64, slack, w));
                }
            }
            Err(e) => {
                let w = json!({ "trial": i, "error": e.to_string(), "trials": trials });
                return Check::new(
                    name,
                    anchor,
                    f64::NEG_INFINITY,
                    tolerance,
                    exploratory,
                    Some(w),
                );
            }
        }
    }
    match worst {
        Some((trial, slack, w)) => {
            let w =
                json!({ "trial": trial, "evaluated": evaluated, "trials": trials, "instance": w });
            Check::new(name, anchor, slack, tolerance, exploratory, Some(w))
        }
        None => Check::new(
            name,
            anchor,
            0.0,
            tolerance,
            true,
            Some(json!({ "note": "no qualifying instances", "trials": trials })),
        ),
    }
}

/// Runs the suite and appends the report to `cfg.output_path` when set.
pub fn run_and_record(suite: Suite, cfg: &SuiteConfig) -> Result<InequalityReport> {
    let report = run_suite(suite, cfg)?;
    if let Some(path) = &cfg.output_path {
        report
            .append_to(path)
            .map_err(|e| Error::Config(format!("writing {}: {e}", path.display())))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SuiteConfig {
        SuiteConfig {
            master_seed: seed,
            trials: Some(8),
            max_m: 3,
            ..SuiteConfig::default()
        }
    }

    fn strip(r: &InequalityReport) -> Value {
        let mut v = serde_json::to_value(r).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        v
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig::default().validate().is_ok());
        let bad = [
            SuiteConfig {
                trials: Some(0),
                ..SuiteConfig::default()
            },
            SuiteConfig {
                trunc_tol: 0.0,
                ..SuiteConfig::default()
            },
            SuiteConfig {
                trunc_tol: 1e-2,
                ..SuiteConfig::default()
            },
            SuiteConfig {
                grid_size: Some(4),
                ..SuiteConfig::default()
            },
            SuiteConfig {
                max_m: 0,
                ..SuiteConfig::default()
            },
            SuiteConfig {
                tolerance_overrides: [("x".to_string(), 0.0)].into_iter().collect(),
                ..SuiteConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(
                run_suite(Suite::Maxent, &cfg),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn status_follows_slack_and_tolerance() {
        assert_eq!(
            Check::new("a", "", -1e-11, 1e-10, false, None).status,
            Status::Pass
        );
        assert_eq!(
            Check::new("a", "", -1e-9, 1e-10, false, None).status,
            Status::Fail
        );
        assert_eq!(
            Check::new("a", "", f64::NAN, 1e-10, false, None).status,
            Status::Fail
        );
        assert_eq!(
            Check::new("a", "", -1.0, 1e-10, true, None).status,
            Status::Exploratory
        );
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn reports_are_deterministic_and_sorted() {
        for suite in Suite::ALL {
            let a = run_suite(suite, &small(3)).unwrap();
            let b = run_suite(suite, &small(3)).unwrap();
            assert_eq!(strip(&a), strip(&b));
            assert!(a.checks.windows(2).all(|w| w[0].name < w[1].name));
            assert!(a.checks.iter().all(|c| c.name.starts_with(suite.name())));
            assert!(a.checks.iter().all(|c| !c.paper_anchor.is_empty()));
            assert!(
                !a.failed(),
                "{suite:?}: {:?}",
                a.checks
                    .iter()
                    .filter(|c| c.status == Status::Fail)
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn all_is_union_of_suites() {
        let all = run_suite(Suite::All, &small(5)).unwrap();
        let count: usize = Suite::ALL
            .iter()
            .map(|&s| run_suite(s, &small(5)).unwrap().checks.len())
            .sum();
        assert_eq!(all.checks.len(), count);
    }

    #[test]
    fn seed_changes_witnesses() {
        let a = run_suite(Suite::Maxent, &small(1)).unwrap();
        let b = run_suite(Suite::Maxent, &small(2)).unwrap();
        let name = "maxent/maxent-ulc";
        assert_ne!(
            a.check(name).unwrap().witness,
            b.check(name).unwrap().witness
        );
    }

    #[test]
    fn tight_override_fails_a_near_equality() {
        let name = "poisson-approx/johnstone-subadditivity-poisson-equality";
        let mut cfg = small(0);
        cfg.tolerance_overrides.insert(name.into(), 1e-300);
        let r = run_suite(Suite::PoissonApprox, &cfg).unwrap();
        assert_eq!(r.check(name).unwrap().status, Status::Fail);
        assert!(r.failed());
    }

    #[test]
    fn trial_errors_become_failures() {
        let cfg = small(0);
        let c = trial_check(&cfg, "s", "s/x", "", 4, 1e-10, false, |_| {
            Err(Error::EmptySupport)
        });
        assert_eq!(c.status, Status::Fail);
        let c = trial_check(&cfg, "s", "s/y", "", 4, 1e-10, false, |_| Ok(None));
        assert_eq!(c.status, Status::Exploratory);
    }

    #[test]
    fn worst_trial_is_lowest_index_on_ties() {
        let cfg = small(0);
        let c = trial_check(&cfg, "s", "s/x", "", 6, 1e-10, false, |_| {
            Ok(Some((1.0, Value::Null)))
        });
        assert_eq!(c.witness.unwrap()["trial"], 0);
    }

    #[test]
    fn append_writes_one_line_per_run() {
        let dir = std::env::temp_dir().join(format!("dent-harness-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.jsonl");
        let _ = std::fs::remove_file(&path);
        let mut cfg = small(0);
        cfg.output_path = Some(path.clone());
        run_and_record(Suite::Poincare, &cfg).unwrap();
        run_and_record(Suite::Poincare, &cfg).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: InequalityReport = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back.suite, "poincare");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
