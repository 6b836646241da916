//! The `mhk` command line: configuration-driven experiment runs with CSV
//! artifacts and a reproducibility manifest.
//!
//! Every subcommand reads a JSON configuration (see [`config`]), applies
//! the flag overrides `--seed`, `--out`, `--trials`, `--horizon`, runs one
//! experiment, writes `<experiment>.csv` plus `manifest.json` into the
//! output directory, and prints a one-line summary. The output directory
//! resolves as `--out`, then the config's `output_path`, then the
//! `MHK_OUT_DIR` environment variable, then the working directory.
//!
//! Exit codes: `0` when the run (and its verdict, if any) passed, `1` when
//! a verdict-bearing experiment reported FAIL, `2` on configuration errors.
//!
//! CSV columns by subcommand, floats at 12 significant digits:
//!
//! | subcommand | columns |
//! |------------|---------|
//! | `simulate` | `trial,step,state` |
//! | `ipm`      | `generator,method,value,est_error` |
//! | `gamma`    | `lag,step_sup,partial_sum` |
//! | `bound`    | `family,epsilon,value_as_stated,value_proof_consistent,valid` |
//! | `validate` | `family,epsilon,p_hat,ci_low,ci_high,bound,verdict` |
//! | `erm`      | `trial,gap,slack,violation` |
//! | `sgd`      | `trial,abs_error,eps,success` |
//! | `bandit`   | `t,arm_set,regret,bound_rhs` |
//!
//! In `simulate`, `state` is the first coordinate of the visited state and
//! step 0 is the drawn start. In `bandit`, `arm_set` is the `|`-joined arm
//! set the first run pulled at step `t` (a representative realization)
//! while `regret` is the mean realized regret across runs, the quantity
//! the expectation bound in `bound_rhs` speaks about.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::apps::{
    regret_bound_check, regret_rhs, sgd_experiment, ucb_m_runs, BanditArm, BanditConfig,
    ErmProblem, SgdConfig,
};
use crate::bounds::BoundReport;
use crate::chains::{ChainModel, FiniteKernel};
use crate::ergodicity::{concentrability, ConcentrabilityOptions};
use crate::error::{Error, Result};
use crate::ipm::ipm_distance;
use crate::montecarlo::{validate_bounds, TailExperiment, Verdict};
use crate::observable::{FunctionProfile, GeneratorClass};
use crate::rng::RngStream;
use crate::space::{MetricSpace, State};

use config::{
    BanditInstanceSpec, BanditSection, BoundSection, ErmSection, ExperimentConfig, GammaSection,
    IpmSection, SgdSection, SimulateSection, StartSpec, ValidateSection,
};
use output::{config_hash, sig12, Csv, Manifest, Overrides, ToolInfo};

/// Fewest Monte Carlo trials `validate` accepts; verdicts on thinner
/// evidence are too noisy to act on.
pub const MIN_VALIDATE_TRIALS: usize = 1_000;

#[derive(Debug, Parser)]
#[command(name = "mhk", version, about = "Markov chain concentration toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Sample chain paths.
    Simulate(RunArgs),
    /// Distances between two configured measures.
    Ipm(RunArgs),
    /// Concentrability coefficient with its per-step table.
    Gamma(RunArgs),
    /// Closed-form tail bounds over a deviation grid.
    Bound(RunArgs),
    /// Monte Carlo tail frequencies checked against bounds.
    Validate(RunArgs),
    /// Empirical risk minimization on a Markov sample.
    Erm(RunArgs),
    /// Averaged-SGD concentration.
    Sgd(RunArgs),
    /// Rested-bandit regret under the UCB policy.
    Bandit(RunArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trial or run count override (simulate, gamma, validate, erm, sgd,
    /// bandit).
    #[arg(long)]
    trials: Option<usize>,
    /// Horizon override (simulate path length, gamma lag budget, bandit
    /// horizon).
    #[arg(long)]
    horizon: Option<usize>,
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, run_args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Ipm(a) => ("ipm", a),
        Command::Gamma(a) => ("gamma", a),
        Command::Bound(a) => ("bound", a),
        Command::Validate(a) => ("validate", a),
        Command::Erm(a) => ("erm", a),
        Command::Sgd(a) => ("sgd", a),
        Command::Bandit(a) => ("bandit", a),
    };
    match execute(name, run_args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mhk {name}: {e}");
            2
        }
    }
}

/// One experiment's artifacts and verdict.
struct Outcome {
    files: Vec<String>,
    /// `Some(false)` downgrades the exit code to 1.
    verdict: Option<bool>,
    summary: String,
}

fn resolve_out(args: &RunArgs, config: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    if let Some(out) = &config.output_path {
        return out.clone();
    }
    if let Some(out) = std::env::var_os("MHK_OUT_DIR") {
        return PathBuf::from(out);
    }
    PathBuf::from(".")
}

fn execute(name: &str, args: &RunArgs) -> Result<i32> {
    let raw = fs::read_to_string(&args.config).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let config: ExperimentConfig = serde_json::from_str(&raw).map_err(|e| {
        Error::Config(format!("{}: {e}", args.config.display()))
    })?;
    config.check(name)?;
    let seed = args.seed.unwrap_or(config.seed);
    let out_dir = resolve_out(args, &config);
    fs::create_dir_all(&out_dir)?;
    let stream = RngStream::new(seed, 0);

    let outcome = match name {
        "simulate" => run_simulate(config.simulate.as_ref().unwrap(), args, &stream, &out_dir)?,
        "ipm" => run_ipm(config.ipm.as_ref().unwrap(), args, &stream, &out_dir)?,
        "gamma" => run_gamma(config.gamma.as_ref().unwrap(), args, &stream, &out_dir)?,
        "bound" => run_bound(config.bound.as_ref().unwrap(), args, &out_dir)?,
        "validate" => run_validate(config.validate.as_ref().unwrap(), args, &stream, &out_dir)?,
        "erm" => run_erm(config.erm.as_ref().unwrap(), args, &stream, &out_dir)?,
        "sgd" => run_sgd(config.sgd.as_ref().unwrap(), args, &stream, &out_dir)?,
        "bandit" => run_bandit(config.bandit.as_ref().unwrap(), args, &stream, &out_dir)?,
        _ => unreachable!("checked by ExperimentConfig::check"),
    };

    let manifest = Manifest {
        schema_version: config::SCHEMA_VERSION,
        experiment: name.to_string(),
        config_sha256: config_hash(raw.as_bytes()),
        seed,
        tool: ToolInfo::current(),
        overrides: Overrides {
            seed: args.seed,
            out: args.out.clone(),
            trials: args.trials,
            horizon: args.horizon,
        },
        outputs: outcome.files,
        verdict: outcome.verdict.map(|v| if v { "PASS" } else { "FAIL" }.to_string()),
        summary: outcome.summary.clone(),
    };
    manifest.write(&out_dir)?;
    println!("{}", outcome.summary);
    Ok(match outcome.verdict {
        Some(false) => 1,
        _ => 0,
    })
}

fn no_trials_override(args: &RunArgs, name: &str) -> Result<()> {
    if args.trials.is_some() {
        return Err(Error::Config(format!("--trials does not apply to {name}")));
    }
    Ok(())
}

fn no_horizon_override(args: &RunArgs, name: &str) -> Result<()> {
    if args.horizon.is_some() {
        return Err(Error::Config(format!("--horizon does not apply to {name}")));
    }
    Ok(())
}

/// First coordinate of a state, the `state` CSV column.
fn state_coord(chain: &ChainModel, s: State) -> f64 {
    match s {
        State::Real(x) => x,
        State::Finite(i) => match chain.space() {
            Some(space) => space.coord(i)[0],
            None => i as f64,
        },
    }
}

fn run_simulate(
    section: &SimulateSection,
    args: &RunArgs,
    stream: &RngStream,
    out_dir: &Path,
) -> Result<Outcome> {
    let n = args.horizon.unwrap_or(section.n);
    let trials = args.trials.unwrap_or(section.trials);
    if n == 0 || trials == 0 {
        return Err(Error::Config("simulate needs n >= 1 and trials >= 1".into()));
    }
    let chain = section.chain.build()?;
    let start_spec = section.start.clone().unwrap_or(StartSpec::Stationary);
    let start = start_spec.build(&chain, &stream.substream(u64::MAX))?;

    let mut csv = Csv::new(&["trial", "step", "state"]);
    for trial in 0..trials as u64 {
        let mut rng = stream.substream(trial).rng();
        let x0 = start.sample(&mut rng);
        csv.row(&[trial.to_string(), "0".to_string(), sig12(state_coord(&chain, x0))]);
        let path = chain.sample_path(x0, n - 1, &mut rng)?;
        for (k, s) in path.iter().enumerate() {
            csv.row(&[
                trial.to_string(),
                (k + 1).to_string(),
                sig12(state_coord(&chain, *s)),
            ]);
        }
    }
    let file = csv.write(out_dir, "simulate.csv")?;
    Ok(Outcome {
        files: vec![file],
        verdict: None,
        summary: format!("simulate: {trials} path(s) of {n} states from the {} chain", chain.kind()),
    })
}

fn run_ipm(
    section: &IpmSection,
    args: &RunArgs,
    stream: &RngStream,
    out_dir: &Path,
) -> Result<Outcome> {
    no_trials_override(args, "ipm")?;
    no_horizon_override(args, "ipm")?;
    if section.generators.is_empty() {
        return Err(Error::Config("ipm needs at least one generator".into()));
    }
    let mu = section.mu.build(&stream.substream(1))?;
    let nu = section.nu.build(&stream.substream(2))?;
    let pi = match &section.pi {
        Some(spec) => Some(spec.build(&stream.substream(3))?),
        None => None,
    };
    let mut csv = Csv::new(&["generator", "method", "value", "est_error"]);
    let mut shown = Vec::new();
    for spec in &section.generators {
        let g = spec.build();
        if matches!(g, GeneratorClass::L2Pi) && pi.is_none() {
            return Err(Error::Config("the l2pi generator needs a pi section".into()));
        }
        let v = ipm_distance(&mu, &nu, g, pi.as_ref())?;
        shown.push(format!("{}={}", g.name(), sig12(v.value)));
        csv.row(&[
            g.name().to_string(),
            v.method.name().to_string(),
            sig12(v.value),
            sig12(v.est_error),
        ]);
    }
    let file = csv.write(out_dir, "ipm.csv")?;
    Ok(Outcome {
        files: vec![file],
        verdict: None,
        summary: format!("ipm: {}", shown.join(" ")),
    })
}

fn run_gamma(
    section: &GammaSection,
    args: &RunArgs,
    stream: &RngStream,
    out_dir: &Path,
) -> Result<Outcome> {
    let chain = section.chain.build()?;
    let mut opts = ConcentrabilityOptions::default();
    if let Some(h) = args.horizon.or(section.horizon) {
        opts.horizon = h;
    }
    if let Some(t) = section.tol {
        opts.tol = t;
    }
    if let Some(t) = args.trials.or(section.trials) {
        opts.trials = t;
    }
    let report = concentrability(&chain, section.generator.build(), &opts, stream)?;
    let mut csv = Csv::new(&["lag", "step_sup", "partial_sum"]);
    let mut partial = 0.0;
    for (i, step) in report.per_step.iter().enumerate() {
        partial += step;
        csv.row(&[(i + 1).to_string(), sig12(*step), sig12(partial)]);
    }
    let file = csv.write(out_dir, "gamma.csv")?;
    let mut summary = format!(
        "gamma: {} under {} ({}, {} lag(s), tail {})",
        sig12(report.gamma),
        report.generator.name(),
        if report.exact { "exact" } else { "sampled" },
        report.truncation_horizon,
        sig12(report.tail_bound),
    );
    if let Some(gt) = report.gamma_tilde {
        summary.push_str(&format!(", classical-TV gamma_tilde {}", sig12(gt)));
    }
    Ok(Outcome { files: vec![file], verdict: None, summary })
}

fn bound_rows(csv: &mut Csv, report: &BoundReport) {
    for b in &report.per_epsilon {
        csv.row(&[
            report.family.name().to_string(),
            sig12(b.eps),
            sig12(b.value_as_stated),
            sig12(b.value_proof_consistent),
            b.valid.to_string(),
        ]);
    }
}

fn run_bound(section: &BoundSection, args: &RunArgs, out_dir: &Path) -> Result<Outcome> {
    no_trials_override(args, "bound")?;
    no_horizon_override(args, "bound")?;
    if section.specs.is_empty() {
        return Err(Error::Config("bound needs at least one spec".into()));
    }
    let mut csv =
        Csv::new(&["family", "epsilon", "value_as_stated", "value_proof_consistent", "valid"]);
    let mut points = 0;
    for spec in &section.specs {
        let report = spec.evaluate()?;
        points += report.per_epsilon.len();
        for note in &report.notes {
            println!("note [{}]: {note}", report.family.name());
        }
        bound_rows(&mut csv, &report);
    }
    let file = csv.write(out_dir, "bound.csv")?;
    Ok(Outcome {
        files: vec![file],
        verdict: None,
        summary: format!(
            "bound: {} famil{} on {points} grid point(s)",
            section.specs.len(),
            if section.specs.len() == 1 { "y" } else { "ies" },
        ),
    })
}

fn run_validate(
    section: &ValidateSection,
    args: &RunArgs,
    stream: &RngStream,
    out_dir: &Path,
) -> Result<Outcome> {
    no_horizon_override(args, "validate")?;
    let trials = args.trials.unwrap_or(section.trials);
    if trials < MIN_VALIDATE_TRIALS {
        return Err(Error::Config(format!(
            "validate needs at least {MIN_VALIDATE_TRIALS} trials, got {trials}"
        )));
    }
    for spec in &section.specs {
        if spec.n != section.n as u64 {
            return Err(Error::Config(format!(
                "bound spec {} has n = {} but the experiment simulates n = {}",
                spec.family.name(),
                spec.n,
                section.n
            )));
        }
        if spec.eps != section.eps {
            return Err(Error::Config(format!(
                "bound spec {} is evaluated on a different eps grid than the experiment",
                spec.family.name()
            )));
        }
    }
    let chain = section.chain.build()?;
    let profile = section.observable.build(&chain)?;
    let start_spec = section.start.clone().unwrap_or(StartSpec::Stationary);
    let start = start_spec.build(&chain, &stream.substream(u64::MAX))?;
    let mut experiment =
        TailExperiment::new(chain, vec![profile], section.n, start, trials, *stream)?;
    if let Some(side) = section.side {
        experiment = experiment.with_side(side);
    }
    let estimate = experiment.empirical_tail(&section.eps)?;
    let reports: Vec<BoundReport> =
        section.specs.iter().map(|s| s.evaluate()).collect::<Result<_>>()?;
    let rows = validate_bounds(&estimate, &reports)?;

    let mut csv =
        Csv::new(&["family", "epsilon", "p_hat", "ci_low", "ci_high", "bound", "verdict"]);
    let mut fails = 0;
    for row in &rows {
        if row.verdict == Verdict::Fail {
            fails += 1;
        }
        csv.row(&[
            row.family.clone(),
            sig12(row.eps),
            sig12(row.p_hat),
            sig12(row.ci_low),
            sig12(row.ci_high),
            sig12(row.bound),
            match row.verdict {
                Verdict::Pass => "PASS".to_string(),
                Verdict::Fail => "FAIL".to_string(),
            },
        ]);
    }
    let file = csv.write(out_dir, "validate.csv")?;
    Ok(Outcome {
        files: vec![file],
        verdict: Some(fails == 0),
        summary: format!(
            "validate: {}/{} rows PASS over {trials} trials{}",
            rows.len() - fails,
            rows.len(),
            if fails == 0 { "" } else { " -- FAIL" },
        ),
    })
}

fn run_erm(
    section: &ErmSection,
    args: &RunArgs,
    stream: &RngStream,
    out_dir: &Path,
) -> Result<Outcome> {
    no_horizon_override(args, "erm")?;
    let trials = args.trials.unwrap_or(section.trials);
    let problem = ErmProblem::quadratic_decimal(
        section.k_ref,
        section.n_samples,
        section.gamma,
        section.delta,
    )?;
    let report = problem.erm_experiment(trials, stream)?;
    let mut csv = Csv::new(&["trial", "gap", "slack", "violation"]);
    for (t, gap) in report.gaps.iter().enumerate() {
        csv.row(&[
            t.to_string(),
            sig12(*gap),
            sig12(report.slack),
            (*gap > report.slack).to_string(),
        ]);
    }
    let file = csv.write(out_dir, "erm.csv")?;
    Ok(Outcome {
        files: vec![file],
        verdict: Some(report.pass),
        summary: format!(
            "erm: {} (violations {}/{}, rate {} <= delta {} at 99%, theta* {}, slack {})",
            if report.pass { "PASS" } else { "FAIL" },
            report.violations,
            report.trials,
            sig12(report.violation_rate),
            sig12(report.delta),
            sig12(report.theta_star),
            sig12(report.slack),
        ),
    })
}

fn run_sgd(
    section: &SgdSection,
    args: &RunArgs,
    stream: &RngStream,
    out_dir: &Path,
) -> Result<Outcome> {
    no_horizon_override(args, "sgd")?;
    let trials = args.trials.unwrap_or(section.trials);
    let model = section.chain.build()?;
    let ChainModel::Sgd(sgd_chain) = model else {
        return Err(Error::Config("the sgd section needs a chain of kind \"sgd\"".into()));
    };
    let config = SgdConfig::new(sgd_chain, section.gamma_bl, section.eps, section.delta)?;
    let report = sgd_experiment(&config, trials, stream)?;
    let mut csv = Csv::new(&["trial", "abs_error", "eps", "success"]);
    for (t, err) in report.errors.iter().enumerate() {
        csv.row(&[
            t.to_string(),
            sig12(*err),
            sig12(report.eps),
            (*err < report.eps).to_string(),
        ]);
    }
    let file = csv.write(out_dir, "sgd.csv")?;
    let pass = report.pass && report.contraction_ok;
    Ok(Outcome {
        files: vec![file],
        verdict: Some(pass),
        summary: format!(
            "sgd: {} (successes {}/{} with m {}, alpha_T {}, contraction ratio {} {})",
            if pass { "PASS" } else { "FAIL" },
            report.successes,
            report.trials,
            report.m,
            sig12(report.alpha_t),
            sig12(report.max_contraction_ratio),
            if report.contraction_ok { "ok" } else { "exceeded" },
        ),
    })
}

/// Decade checkpoints `10, 100, ...` up to and including the horizon.
fn decade_checkpoints(horizon: usize) -> Vec<usize> {
    let mut ts = Vec::new();
    let mut t = 10usize;
    while t < horizon {
        ts.push(t);
        match t.checked_mul(10) {
            Some(next) => t = next,
            None => break,
        }
    }
    ts.push(horizon);
    ts
}

fn run_bandit(
    section: &BanditSection,
    args: &RunArgs,
    stream: &RngStream,
    out_dir: &Path,
) -> Result<Outcome> {
    let horizon = args.horizon.unwrap_or(section.horizon);
    let runs = args.trials.unwrap_or(section.runs);
    let probe = stream.substream(u64::MAX);
    let arms = match &section.instance {
        BanditInstanceSpec::Reference => {
            BanditConfig::three_arm_reference(horizon, &probe)?.arms
        }
        BanditInstanceSpec::Custom { arms } => {
            let mut built = Vec::with_capacity(arms.len());
            for (i, spec) in arms.iter().enumerate() {
                let kernel = match &spec.positions {
                    Some(p) => FiniteKernel::new(
                        spec.rows.clone(),
                        std::sync::Arc::new(MetricSpace::line_at(p)?),
                    )?,
                    None => FiniteKernel::on_line(spec.rows.clone())?,
                };
                let reward = FunctionProfile::table(spec.rewards.clone(), kernel.space())?;
                built.push(BanditArm::new(
                    ChainModel::Finite(kernel),
                    reward,
                    spec.r_stretch,
                    spec.gamma,
                    &probe.substream(i as u64),
                )?);
            }
            built
        }
    };
    let config = BanditConfig::new(arms, section.m_play, section.l_explore, horizon)?;
    let traces = ucb_m_runs(&config, runs, stream)?;
    let checkpoints = match &section.checkpoints {
        Some(ts) => ts.clone(),
        None => decade_checkpoints(horizon),
    };
    let verdict = regret_bound_check(&config, &traces, &checkpoints)?;

    let mut csv = Csv::new(&["t", "arm_set", "regret", "bound_rhs"]);
    for t in 1..=horizon {
        let arm_set = traces[0]
            .arm_set(t)
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("|");
        let mean_regret =
            traces.iter().map(|tr| tr.regret_at(t)).sum::<f64>() / traces.len() as f64;
        csv.row(&[t.to_string(), arm_set, sig12(mean_regret), sig12(regret_rhs(&config, t)?)]);
    }
    let file = csv.write(out_dir, "bandit.csv")?;
    let last = verdict.checkpoints.last().expect("checkpoints are nonempty");
    Ok(Outcome {
        files: vec![file],
        verdict: Some(verdict.pass),
        summary: format!(
            "bandit: {} (mean regret {} vs bound {} at n = {}, L {} over {runs} run(s))",
            if verdict.pass { "PASS" } else { "FAIL" },
            sig12(last.mean_regret),
            sig12(last.bound_rhs),
            last.t,
            sig12(verdict.l_used),
        ),
    })
}
