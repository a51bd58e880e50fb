use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use discrete_entropy::concentration::{
    poincare_bound_clc, poincare_constant, poincare_constant_mixed,
};
use discrete_entropy::harness::{run_and_record, Status, Suite, SuiteConfig};
use discrete_entropy::info::{johnstone_info, poisson_approx_report, scaled_fisher};
use discrete_entropy::monotonicity::maxent_gap;
use discrete_entropy::pmf::{c_log_concavity, entropy, ulc_check};
use discrete_entropy::shepp_olkin::{critical_q_search, entropy_profile, EntropyKind, PathSpec};
use discrete_entropy::{Family, Pmf64};

#[derive(Parser)]
#[command(
    name = "dent",
    version,
    about = "Entropy and concentration functionals of integer-valued laws"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Truncation tolerance for infinite-support families.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Trial count (overrides each check's default).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Grid size for entropy profiles.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output file. Verify reports are appended, everything else is overwritten.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-check tolerance override, `name=value`; may be repeated.
    #[arg(long = "tolerance", global = true, value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate functionals of a mass function read from JSON.
    Compute {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated: entropy, mean, variance, K, johnstone, c, ulc, poincare, d-poisson, tv-poisson, maxent-gap.
        #[arg(long, value_delimiter = ',', default_value = "entropy,mean,variance")]
        functionals: Vec<String>,
    },
    /// Run an inequality suite; exits 1 if a hard check fails.
    Verify {
        /// poisson-approx, maxent, monotonicity, poincare, log-sobolev, shepp-olkin or all.
        suite: String,
        /// Largest number of Bernoulli coordinates in path checks.
        #[arg(long, default_value_t = 8)]
        m: usize,
    },
    /// Entropy along affine Bernoulli-sum paths.
    #[command(subcommand)]
    SheppOlkin(SheppOlkinCommand),
    /// Poincaré constant of a family or a JSON mass function.
    Poincare(PoincareArgs),
}

#[derive(Subcommand)]
enum SheppOlkinCommand {
    /// Write the entropy profile along the path as CSV.
    Profile {
        #[arg(long, value_delimiter = ',', required = true)]
        p0: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        p1: Vec<f64>,
        #[arg(long, default_value = "shannon")]
        kind: EntropyKind,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
    },
    /// Bisect for the order at which convexity witnesses appear.
    Scan {
        #[arg(long)]
        kind: EntropyKind,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
}

#[derive(Args)]
struct PoincareArgs {
    /// poisson, bernoulli, binomial, geometric, negative-binomial or tilted-poisson.
    #[arg(long, conflicts_with = "input")]
    family: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use the `∇_n` derivative with this `n`.
    #[arg(long)]
    mixed: Option<usize>,
}

/// Why a command stopped: bad input (exit 2) or a failed hard check (exit 1).
enum Failure {
    Input(anyhow::Error),
    Checks,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Compute { input, functionals } => {
            let pmf = read_pmf(&input)?;
            let out = compute(&pmf, &functionals)?;
            emit_json(
                g,
                &json!({ "input": input, "kind": pmf.kind(), "functionals": out }),
            )?;
        }
        Command::Verify { suite, m } => {
            let suite: Suite = suite.parse().map_err(anyhow::Error::from)?;
            let cfg = suite_config(g, m)?;
            let report = run_and_record(suite, &cfg).map_err(anyhow::Error::from)?;
            for c in &report.checks {
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Exploratory => "explore",
                };
                eprintln!("{status:>7}  {}  slack {:e}", c.name, c.slack);
            }
            if g.out.is_none() {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).context("serializing report")?
                );
            }
            if report.failed() {
                return Err(Failure::Checks);
            }
        }
        Command::SheppOlkin(SheppOlkinCommand::Profile { p0, p1, kind, q }) => {
            let path = PathSpec::new(p0, p1).map_err(|e| anyhow!("invalid path: {e}"))?;
            let grid = g.grid.unwrap_or(101);
            let profile = entropy_profile(&path, grid, kind, q).map_err(anyhow::Error::from)?;
            let sink: Box<dyn Write> = match &g.out {
                Some(p) => Box::new(
                    fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
                ),
                None => Box::new(io::stdout()),
            };
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(["t", "value", "second_difference"])
                .context("writing CSV")?;
            for pt in &profile {
                let d = pt
                    .second_difference
                    .map(|d| d.to_string())
                    .unwrap_or_default();
                w.write_record([pt.t.to_string(), pt.value.to_string(), d])
                    .context("writing CSV")?;
            }
            w.flush().context("writing CSV")?;
        }
        Command::SheppOlkin(SheppOlkinCommand::Scan { kind, m }) => {
            let trials = g.trials.unwrap_or(200);
            let report =
                critical_q_search::<f64>(kind, m, trials, g.seed).map_err(anyhow::Error::from)?;
            let mut v = serde_json::to_value(&report).context("serializing scan")?;
            v["m"] = json!(m);
            v["trials"] = json!(trials);
            v["seed"] = json!(g.seed);
            emit_json(g, &v)?;
        }
        Command::Poincare(args) => {
            let v = poincare(g, &args)?;
            emit_json(g, &v)?;
        }
    }
    Ok(())
}

fn suite_config(g: &Global, m: usize) -> anyhow::Result<SuiteConfig> {
    let mut overrides = BTreeMap::new();
    for item in &g.tolerances {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--tolerance `{item}` is not NAME=VALUE"))?;
        let value: f64 = value
            .parse()
            .with_context(|| format!("--tolerance {name}: `{value}` is not a number"))?;
        overrides.insert(name.to_string(), value);
    }
    let cfg = SuiteConfig {
        master_seed: g.seed,
        trunc_tol: g.tol,
        trials: g.trials,
        grid_size: g.grid,
        max_m: m,
        tolerance_overrides: overrides,
        output_path: g.out.clone(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn read_pmf(path: &Path) -> anyhow::Result<Pmf64> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit_json(g: &Global, v: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match &g.out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// JSON numbers cannot be infinite, so infinities are written as strings.
fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("+inf")
    } else {
        json!("-inf")
    }
}

fn or_error(r: discrete_entropy::Result<f64>) -> Value {
    match r {
        Ok(x) => real(x),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn compute(p: &Pmf64, names: &[String]) -> anyhow::Result<Map<String, Value>> {
    let mut out = Map::new();
    for name in names {
        let v = match name.as_str() {
            "entropy" => real(entropy(p)),
            "mean" => real(p.mean()),
            "variance" => real(p.variance()),
            "K" | "k" => or_error(scaled_fisher(p)),
            "johnstone" | "I" => real(johnstone_info(p)),
            "c" => or_error(c_log_concavity(p)),
            "ulc" => json!(ulc_check(p)),
            "poincare" | "R" => or_error(poincare_constant(p).map(|e| e.constant)),
            "d-poisson" => or_error(poisson_approx_report(p).map(|r| r.d_to_poisson)),
            "tv-poisson" => or_error(poisson_approx_report(p).map(|r| r.tv)),
            "maxent-gap" => or_error(maxent_gap(p).map(|g| g.gap)),
            other => bail!("field `functionals`: unknown functional `{other}`"),
        };
        out.insert(name.clone(), v);
    }
    Ok(out)
}

fn family_from_args(a: &PoincareArgs) -> anyhow::Result<Family<f64>> {
    let name = a
        .family
        .as_deref()
        .ok_or_else(|| anyhow!("either --family or --input is required"))?;
    let need =
        |v: Option<f64>, flag: &str| v.ok_or_else(|| anyhow!("--family {name} needs --{flag}"));
    let params = match name {
        "poisson" => vec![need(a.lambda, "lambda")?],
        "bernoulli" | "geometric" => vec![need(a.p, "p")?],
        "binomial" => vec![need(a.n.map(|n| n as f64), "n")?, need(a.p, "p")?],
        "negative-binomial" => vec![need(a.r, "r")?, need(a.p, "p")?],
        "tilted-poisson" => vec![need(a.lambda, "lambda")?, need(a.beta, "beta")?],
        other => bail!("unknown family `{other}`"),
    };
    Ok(Family::from_name_params(name, &params)?)
}

fn poincare(g: &Global, a: &PoincareArgs) -> anyhow::Result<Value> {
    let p: Pmf64 = match &a.input {
        Some(path) => read_pmf(path)?,
        None => Pmf64::from_family(family_from_args(a)?, g.tol)?,
    };
    let (mean, var) = p.moments();
    let mut v = json!({
        "support_end": p.support_end(),
        "tail_bound": p.tail_bound(),
        "mean": mean,
        "variance": var,
    });
    if let Some(f) = p.family() {
        v["family"] = json!(f.tag());
    }
    let est = match a.mixed {
        Some(n) => poincare_constant_mixed(&p, n)?,
        None => poincare_constant(&p)?,
    };
    // g(x) = x gives var/energy = var for both derivatives.
    v["linear_witness"] = json!(var);
    v["estimate"] = json!(est);
    if a.mixed.is_none() {
        if ulc_check(&p) {
            let r = est.constant;
            v["daly"] = json!({ "lower": var, "upper": mean, "satisfied": r >= var - 1e-9 && r <= mean + 1e-9 });
        }
        if let Ok(clc) = poincare_bound_clc(&p) {
            v["clc"] = json!({ "c": clc.c, "bound": clc.bound, "satisfied": clc.satisfied });
        }
    }
    Ok(v)
}
