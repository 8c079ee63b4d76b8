//! Command-line front end: argument parsing, experiment runs and report
//! rendering. `main.rs` only maps [`run`] onto the process exit status.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use qpk_core::adversary::{
    impersonate, provision_eve, AdversaryError, AttackStrategy, StrategyKind,
};
use qpk_core::bounds::{break_probability_bound, BoundError, BoundReport};
use qpk_core::montecarlo::{try_estimate, Estimate};
use qpk_core::oracle::{key_params_for_t, OracleError};
use qpk_core::protocol::{identify, keygen, Params, ProtocolError};
use qpk_core::rng::{derive_seed, substream, GENERATOR_NAME};
use qpk_core::suite::{run_suite, CheckFamily, Fault, SuiteConfig};

pub mod output;

use output::{render_record, render_table, Format};

pub const MAX_R: u32 = 64;
pub const MAX_S: usize = 4096;
/// Largest `t` for which attack matrices are built.
pub const MAX_T_MATRIX: usize = 16;
/// Largest `t` for gradient-ascent oracles.
pub const MAX_T_ASCENT: usize = 8;

pub const VERSION: &str = concat!("qpk ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad parameters, 1 for everything that failed at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_)
            | CliError::Bound(_)
            | CliError::Protocol(ProtocolError::InvalidParams(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "qpk",
    version,
    about = "Quantum public-key identification simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed; every random draw derives from it.
    #[arg(long, env = "QPK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Honest,
    Attack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Random,
    PhaseEst,
    Optimal,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => StrategyKind::RandomGuess,
            StrategyArg::PhaseEst => StrategyKind::PhaseEstimation,
            StrategyArg::Optimal => StrategyKind::OptimalIndividual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    Povm,
}

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub s: usize,
    /// Legitimate copies Eve holds; she attacks with `t = r + t'` black boxes.
    #[arg(long = "t-prime", default_value_t = 0)]
    pub t_prime: u32,
    #[arg(long, value_enum, default_value_t = StrategyArg::Optimal)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Mode::Honest)]
    pub mode: Mode,
    #[command(flatten)]
    pub attack: AttackArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a private key and public-copy descriptors.
    Keygen {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo acceptance of the honest prover or an attack.
    Simulate(SimulateArgs),
    /// Same as `simulate --mode attack`.
    Attack(AttackArgs),
    /// Analytic break-probability bounds.
    Bound {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long = "t-prime", default_value_t = 0)]
        t_prime: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Run the numerical verification suite.
    Verify {
        /// Comma-separated check families.
        #[arg(long, value_delimiter = ',')]
        only: Vec<CheckFamily>,
        #[arg(long = "t-max", default_value_t = 16)]
        t_max: usize,
        /// Monte Carlo runs per product-rule point.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long = "inject-fault", value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate analytic values, bounds and Monte Carlo estimates over a grid.
    Sweep {
        /// Values of r: a list `1,2,4` or a range `1..4`.
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        s: String,
        #[arg(long = "t-prime")]
        t_prime: Option<String>,
        /// Values of t; each picks the smallest r with `t = r + t'`, `t' < r`.
        #[arg(long, conflicts_with_all = ["r", "t_prime"])]
        t: Option<String>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Optimal)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
}

/// What a command produced: the rendered report and whether its checks
/// passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rendered: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
struct Report<T: Serialize> {
    command: &'static str,
    version: &'static str,
    generator: &'static str,
    seed: u64,
    config: Value,
    results: T,
    pass: bool,
    wall_clock_seconds: f64,
}

fn check_r(r: u32) -> Result<()> {
    if r == 0 {
        return Err(usage("--r must be at least 1"));
    }
    if r > MAX_R {
        return Err(usage(format!("--r {r} exceeds the cap r <= {MAX_R}")));
    }
    Ok(())
}

fn check_s(s: usize) -> Result<()> {
    if s == 0 {
        return Err(usage("--s must be at least 1"));
    }
    if s > MAX_S {
        return Err(usage(format!("--s {s} exceeds the cap s <= {MAX_S}")));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    Ok(())
}

fn check_attack(r: u32, t_prime: u32, kind: StrategyKind) -> Result<usize> {
    if t_prime >= r {
        return Err(usage(format!("--t-prime {t_prime} must be below r = {r}")));
    }
    let t = (r + t_prime) as usize;
    if kind != StrategyKind::RandomGuess && t > MAX_T_MATRIX {
        return Err(usage(format!(
            "t = r + t' = {t} exceeds the cap t <= {MAX_T_MATRIX} for attack matrices"
        )));
    }
    Ok(t)
}

/// Parses `3`, `1,2,4` or an inclusive range `1..8`.
pub fn parse_list(flag: &str, text: &str) -> Result<Vec<u64>> {
    let bad = || {
        usage(format!(
            "--{flag}: cannot parse '{text}' as a list or range"
        ))
    };
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad())?;
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

fn finish<T: Serialize>(report: &Report<T>, format: Format) -> Result<Outcome> {
    let value = serde_json::to_value(report)?;
    Ok(Outcome {
        rendered: render_record(&value, format)?,
        pass: report.pass,
    })
}

/// Runs one command and returns its report. Files named by `--out` are
/// written here; the caller prints `rendered` when there is no `--out`.
pub fn run(cli: Cli) -> Result<Outcome> {
    let (outcome, out) = match cli.command {
        Command::Keygen { r, s, common } => {
            let outcome = cmd_keygen(r, s, &common)?;
            return Ok(outcome);
        }
        Command::Simulate(args) => {
            let out = args.attack.common.out.clone();
            (cmd_simulate(args.mode, &args.attack)?, out)
        }
        Command::Attack(args) => {
            let out = args.common.out.clone();
            (cmd_simulate(Mode::Attack, &args)?, out)
        }
        Command::Bound {
            r,
            s,
            epsilon,
            t_prime,
            common,
        } => (cmd_bound(r, s, epsilon, t_prime, &common)?, common.out),
        Command::Verify {
            only,
            t_max,
            trials,
            inject_fault,
            common,
        } => (
            cmd_verify(only, t_max, trials, inject_fault, &common)?,
            common.out,
        ),
        Command::Sweep {
            r,
            s,
            t_prime,
            t,
            strategy,
            trials,
            common,
        } => {
            let grid = sweep_grid(r.as_deref(), &s, t_prime.as_deref(), t.as_deref())?;
            (
                cmd_sweep(&grid, strategy.into(), trials, &common)?,
                common.out,
            )
        }
    };
    if let Some(path) = out {
        write_file(&path, &outcome.rendered)?;
        return Ok(Outcome {
            rendered: String::new(),
            pass: outcome.pass,
        });
    }
    Ok(outcome)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(unix)]
fn write_private(path: &Path, contents: &str) -> Result<()> {
    use std::io::Write;
    use std::os::unix::fs::OpenOptionsExt;
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .mode(0o600)
        .open(path)
        .map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)
}

#[cfg(not(unix))]
fn write_private(path: &Path, contents: &str) -> Result<()> {
    write_file(path, contents)
}

/// `<out>.pub.json` next to the private key file.
pub fn public_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".pub.json");
    PathBuf::from(name)
}

fn cmd_keygen(r: u32, s: usize, common: &Common) -> Result<Outcome> {
    check_r(r)?;
    check_s(s)?;
    let params = Params::new(r, s)?;
    let mut issuer = keygen(params, &mut substream(common.seed, 0));
    let private = issuer.export_private(common.seed);
    let descriptors = (0..r)
        .map(|_| Ok(issuer.issue_public_key()?.descriptor(r, common.seed)))
        .collect::<Result<Vec<_>>>()?;
    let private_json = serde_json::to_string_pretty(&serde_json::to_value(&private)?)? + "\n";
    let public_json = serde_json::to_string_pretty(&serde_json::to_value(&descriptors)?)? + "\n";
    let summary = match &common.out {
        Some(path) => {
            write_private(path, &private_json)?;
            let pub_path = public_path(path);
            write_file(&pub_path, &public_json)?;
            json!({
                "copy_budget": r,
                "s": s,
                "private_key": path.display().to_string(),
                "public_copies": pub_path.display().to_string(),
            })
        }
        None => json!({
            "copy_budget": r,
            "s": s,
            "private_key": serde_json::to_value(&private)?,
            "public_copies": serde_json::to_value(&descriptors)?,
        }),
    };
    Ok(Outcome {
        rendered: render_record(&summary, common.format)?,
        pass: true,
    })
}

#[derive(Debug, Serialize)]
struct SimulateResults {
    acceptance: Estimate,
    /// Per-iteration success of the strategy; 1 for the honest prover.
    alpha: f64,
    expected_acceptance: f64,
    z_score: f64,
    within_4_sigma: bool,
    p_break_bound: f64,
    below_bound: Option<bool>,
    strategy: Option<qpk_core::adversary::StrategyDescriptor>,
    note: Option<&'static str>,
}

const BOUND_NOTE: &str =
    "the break-probability bound holds for every adversary and is not expected to be tight";

fn cmd_simulate(mode: Mode, args: &AttackArgs) -> Result<Outcome> {
    let start = Instant::now();
    check_r(args.r)?;
    check_s(args.s)?;
    check_trials(args.trials)?;
    let params = Params::new(args.r, args.s)?;
    let seed = args.common.seed;
    let bound = break_probability_bound(args.r, args.s as u32);
    let (results, config) = match mode {
        Mode::Honest => {
            let est = try_estimate(seed, args.trials, |rng| -> Result<bool> {
                let mut issuer = keygen(params, rng);
                let mut copy = issuer.issue_public_key()?;
                Ok(identify(&mut issuer, &mut copy, rng)?.accepted())
            })?;
            let results = SimulateResults {
                acceptance: est,
                alpha: 1.0,
                expected_acceptance: 1.0,
                z_score: est.z_score(1.0),
                within_4_sigma: est.successes == est.trials,
                p_break_bound: bound,
                below_bound: None,
                strategy: None,
                note: None,
            };
            let config = json!({"mode": "honest", "r": args.r, "s": args.s, "trials": args.trials});
            (results, config)
        }
        Mode::Attack => {
            let kind: StrategyKind = args.strategy.into();
            let t = check_attack(args.r, args.t_prime, kind)?;
            let strategy = AttackStrategy::of_kind(kind, t)?;
            let alpha = strategy.per_iteration_success();
            let expected = alpha.powi(args.s as i32);
            let t_prime = args.t_prime;
            let est = try_estimate(seed, args.trials, |rng| -> Result<bool> {
                let mut issuer = keygen(params, rng);
                let (mut ledger, mut copies) = provision_eve(&mut issuer, t_prime)?;
                Ok(impersonate(&strategy, &mut ledger, &mut copies[0], rng)?.accepted())
            })?;
            let results = SimulateResults {
                acceptance: est,
                alpha,
                expected_acceptance: expected,
                z_score: est.z_score(expected),
                within_4_sigma: est.within_sigma(expected, 4.0),
                p_break_bound: bound,
                below_bound: Some(est.below(bound, 4.0)),
                strategy: Some(strategy.descriptor()),
                note: Some(BOUND_NOTE),
            };
            let config = json!({
                "mode": "attack",
                "r": args.r,
                "s": args.s,
                "t_prime": args.t_prime,
                "t": t,
                "strategy": kind.name(),
                "trials": args.trials,
            });
            (results, config)
        }
    };
    let pass = results.within_4_sigma && results.below_bound.unwrap_or(true);
    let report = Report {
        command: "simulate",
        version: VERSION,
        generator: GENERATOR_NAME,
        seed,
        config,
        results,
        pass,
        wall_clock_seconds: elapsed(start),
    };
    finish(&report, args.common.format)
}

fn cmd_bound(
    r: u32,
    s: Option<u32>,
    epsilon: Option<f64>,
    t_prime: u32,
    common: &Common,
) -> Result<Outcome> {
    let start = Instant::now();
    check_r(r)?;
    let report = match (s, epsilon) {
        (Some(s), None) => {
            check_s(s as usize)?;
            BoundReport::new(r, s, t_prime)?
        }
        (None, Some(eps)) => BoundReport::for_epsilon(r, eps, t_prime)?,
        _ => return Err(usage("bound takes exactly one of --s and --epsilon")),
    };
    let config = json!({"r": r, "s": s, "epsilon": epsilon, "t_prime": t_prime});
    let report = Report {
        command: "bound",
        version: VERSION,
        generator: GENERATOR_NAME,
        seed: common.seed,
        config,
        results: report,
        pass: true,
        wall_clock_seconds: elapsed(start),
    };
    finish(&report, common.format)
}

fn cmd_verify(
    only: Vec<CheckFamily>,
    t_max: usize,
    trials: u64,
    fault: Option<FaultArg>,
    common: &Common,
) -> Result<Outcome> {
    let start = Instant::now();
    if t_max == 0 || t_max > MAX_T_MATRIX {
        return Err(usage(format!(
            "--t-max {t_max} must lie in 1..={MAX_T_MATRIX} (brute-force checks stop at t = {MAX_T_ASCENT})"
        )));
    }
    check_trials(trials)?;
    let cfg = SuiteConfig {
        only: only.clone(),
        t_max,
        seed: common.seed,
        product_trials: trials,
        fault: fault.map(|FaultArg::Povm| Fault::Povm),
        ..SuiteConfig::default()
    };
    let suite = run_suite(&cfg)?;
    let config = json!({
        "only": only.iter().map(|f| f.name()).collect::<Vec<_>>(),
        "t_max": t_max,
        "trials": trials,
        "fault": fault.map(|_| "povm"),
    });
    let pass = suite.all_pass;
    let report = Report {
        command: "verify",
        version: VERSION,
        generator: GENERATOR_NAME,
        seed: common.seed,
        config,
        results: suite,
        pass,
        wall_clock_seconds: elapsed(start),
    };
    match common.format {
        Format::Csv => {
            let rows: Vec<Vec<(String, String)>> = report
                .results
                .checks
                .iter()
                .map(|c| {
                    let params = c
                        .parameters
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect::<Vec<_>>()
                        .join(";");
                    vec![
                        ("check".into(), c.check.clone()),
                        ("parameters".into(), params),
                        (
                            "measured_deviation".into(),
                            c.measured_deviation.to_string(),
                        ),
                        ("tolerance".into(), c.tolerance.to_string()),
                        ("pass".into(), c.pass.to_string()),
                    ]
                })
                .collect();
            Ok(Outcome {
                rendered: render_table(&rows)?,
                pass,
            })
        }
        Format::Text => {
            let mut text = String::new();
            for c in &report.results.checks {
                let params = c
                    .parameters
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                text.push_str(&format!(
                    "{} {} [{}] deviation {:e} (tolerance {:e})\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.check,
                    params,
                    c.measured_deviation,
                    c.tolerance
                ));
            }
            text.push_str(&format!(
                "{} passed, {} failed\nlimitation: {}\n",
                report.results.passed, report.results.failed, report.results.limitation
            ));
            if let Some(note) = &report.results.product_rule_note {
                text.push_str(&format!("product rule: {note}\n"));
            }
            Ok(Outcome {
                rendered: text,
                pass,
            })
        }
        Format::Json => finish(&report, Format::Json),
    }
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub r: u32,
    pub s: usize,
    pub t_prime: u32,
}

pub fn sweep_grid(
    r: Option<&str>,
    s: &str,
    t_prime: Option<&str>,
    t: Option<&str>,
) -> Result<Vec<GridPoint>> {
    let s_values = parse_list("s", s)?;
    let pairs: Vec<(u32, u32)> = match t {
        Some(t) => parse_list("t", t)?
            .into_iter()
            .map(|t| {
                if t == 0 || t as usize > MAX_T_MATRIX {
                    return Err(usage(format!("--t {t} must lie in 1..={MAX_T_MATRIX}")));
                }
                Ok(key_params_for_t(t as usize))
            })
            .collect::<Result<_>>()?,
        None => {
            let rs = parse_list("r", r.unwrap_or("1"))?;
            let tps = parse_list("t-prime", t_prime.unwrap_or("0"))?;
            let mut pairs = Vec::new();
            for &r in &rs {
                let r = u32::try_from(r).map_err(|_| usage(format!("--r {r} is too large")))?;
                for &tp in &tps {
                    let tp = u32::try_from(tp)
                        .map_err(|_| usage(format!("--t-prime {tp} is too large")))?;
                    pairs.push((r, tp));
                }
            }
            pairs
        }
    };
    let mut grid = Vec::new();
    for &(r, tp) in &pairs {
        check_r(r)?;
        for &s in &s_values {
            let s = usize::try_from(s).map_err(|_| usage("--s is too large"))?;
            check_s(s)?;
            grid.push(GridPoint { r, s, t_prime: tp });
        }
    }
    if grid.is_empty() {
        return Err(usage("sweep grid is empty"));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: u32,
    pub s: usize,
    pub t: usize,
    pub alpha: f64,
    pub alpha_s: f64,
    pub bound: f64,
    pub mc_estimate: f64,
    pub std_error: f64,
}

fn cmd_sweep(
    grid: &[GridPoint],
    kind: StrategyKind,
    trials: u64,
    common: &Common,
) -> Result<Outcome> {
    let start = Instant::now();
    check_trials(trials)?;
    for p in grid {
        check_attack(p.r, p.t_prime, kind)?;
    }
    let mut rows = Vec::with_capacity(grid.len());
    for p in grid {
        let t = (p.r + p.t_prime) as usize;
        let strategy = AttackStrategy::of_kind(kind, t)?;
        let alpha = strategy.per_iteration_success();
        let params = Params::new(p.r, p.s)?;
        let point_seed = derive_seed(common.seed, &format!("sweep/{}/{}/{}", p.r, p.s, p.t_prime));
        let t_prime = p.t_prime;
        let est = try_estimate(point_seed, trials, |rng| -> Result<bool> {
            let mut issuer = keygen(params, rng);
            let (mut ledger, mut copies) = provision_eve(&mut issuer, t_prime)?;
            Ok(impersonate(&strategy, &mut ledger, &mut copies[0], rng)?.accepted())
        })?;
        rows.push(SweepRow {
            r: p.r,
            s: p.s,
            t,
            alpha,
            alpha_s: alpha.powi(p.s as i32),
            bound: break_probability_bound(p.r, p.s as u32),
            mc_estimate: est.mean,
            std_error: est.std_error,
        });
    }
    let rendered = match common.format {
        Format::Csv | Format::Text => {
            let table: Vec<Vec<(String, String)>> = rows
                .iter()
                .map(|row| {
                    vec![
                        ("r".into(), row.r.to_string()),
                        ("s".into(), row.s.to_string()),
                        ("t".into(), row.t.to_string()),
                        ("alpha".into(), row.alpha.to_string()),
                        ("alpha_s".into(), row.alpha_s.to_string()),
                        ("bound".into(), row.bound.to_string()),
                        ("mc_estimate".into(), row.mc_estimate.to_string()),
                        ("std_error".into(), row.std_error.to_string()),
                    ]
                })
                .collect();
            if common.format == Format::Csv {
                render_table(&table)?
            } else {
                output::render_text_table(&table)
            }
        }
        Format::Json => {
            let report = Report {
                command: "sweep",
                version: VERSION,
                generator: GENERATOR_NAME,
                seed: common.seed,
                config: json!({"strategy": kind.name(), "trials": trials, "points": grid.len()}),
                results: &rows,
                pass: true,
                wall_clock_seconds: elapsed(start),
            };
            render_record(&serde_json::to_value(&report)?, Format::Json)?
        }
    };
    Ok(Outcome {
        rendered,
        pass: true,
    })
}
