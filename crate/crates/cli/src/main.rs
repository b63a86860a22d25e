use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use drift_pricing::engine::{run_episode, EpisodeConfig};
use drift_pricing::environments::{EnvironmentKind, EnvironmentSpec};
use drift_pricing::harness::{add_slopes, read_report, run_sweep, write_report, SweepSpec};
use drift_pricing::model::{summarize, write_trace, Horizon};
use drift_pricing::strategies::{OffsetRule, StrategyId, StrategyParams};
use drift_pricing::Scalar;

#[derive(Parser)]
#[command(name = "drift-pricing", version, about = "Posted-price simulations against a drifting buyer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and print its loss summary.
    Run(RunArgs),
    /// Run a full strategy x environment x eps grid and write the CSV report.
    Sweep(SweepArgs),
    /// Refit log-log slopes on an existing CSV report.
    Fit(FitArgs),
    /// List strategies and environments.
    List,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, short)]
    strategy: StrategyId,
    #[arg(long, short, default_value = "martingale")]
    environment: String,
    /// Rate schedule, e.g. `constant:0.01`, `geometric:0.25,0.9999,0.0002`,
    /// `spikes:0.125,0.001,1000,10`.
    #[arg(long, default_value = "constant:0.01")]
    schedule: String,
    #[arg(long = "T", short = 'T', default_value_t = 10_000)]
    horizon: usize,
    #[arg(long, default_value_t = 0.5)]
    v1: f64,
    /// Seed of the value process.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed of the strategy's own randomness; defaults to `seed`.
    #[arg(long)]
    strategy_seed: Option<u64>,
    /// Value file for the scripted environment.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long, default_value = "standard")]
    offset_rule: OffsetRule,
    /// Write the full JSONL trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Simulate in single precision.
    #[arg(long)]
    f32: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set reps=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    strategies: Option<String>,
    #[arg(long)]
    environments: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "T", short = 'T')]
    horizon: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print the effective config and exit.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    f32: bool,
}

#[derive(Args)]
struct FitArgs {
    /// CSV report written by `sweep`.
    report: PathBuf,
    /// Also rewrite the slope JSON next to the report.
    #[arg(long)]
    write: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) if args.f32 => run::<f32>(&args),
        Command::Run(args) => run::<f64>(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Fit(args) => fit(&args),
        Command::List => {
            list();
            Ok(())
        }
    }
}

fn run<S: Scalar>(args: &RunArgs) -> Result<()> {
    let kind = match (args.environment.as_str(), &args.script) {
        ("scripted", Some(path)) => EnvironmentKind::Scripted { path: Some(path.clone()), values: Vec::new() },
        ("scripted", None) => bail!("the scripted environment needs --script"),
        (name, _) => EnvironmentKind::parse_simple(name)?,
    };
    let env = EnvironmentSpec::new(kind, args.schedule.parse()?, S::of(args.v1));
    let horizon = Horizon::new(args.horizon)?;
    let mut cfg = EpisodeConfig::new(horizon, env, args.strategy, args.seed, args.strategy_seed.unwrap_or(args.seed));
    cfg.params = StrategyParams { offset_rule: args.offset_rule, ..StrategyParams::default() };
    if args.trace.is_some() {
        cfg = cfg.recording();
    }
    let trace = run_episode(&cfg)?;
    let s = summarize(&trace)?;
    if let Some(path) = &args.trace {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        write_trace(&trace, &mut out)?;
        out.flush()?;
    }
    println!(
        "strategy={} environment={} T={} revenue={} opt={} avg_revenue_loss={} avg_symmetric_loss={}",
        args.strategy,
        args.environment,
        args.horizon,
        s.total_revenue.as_f64(),
        s.opt.as_f64(),
        s.avg_revenue_loss.as_f64(),
        s.avg_symmetric_loss.as_f64()
    );
    Ok(())
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec> {
    let mut spec = SweepSpec::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        spec.apply_config(&text).with_context(|| format!("in {}", path.display()))?;
    }
    let flags = [
        ("strategies", args.strategies.clone()),
        ("environments", args.environments.clone()),
        ("eps", args.eps.clone()),
        ("T", args.horizon.map(|x| x.to_string())),
        ("reps", args.reps.map(|x| x.to_string())),
        ("base_seed", args.base_seed.map(|x| x.to_string())),
        ("output", args.output.as_ref().map(|p| p.display().to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            spec.set(key, &v)?;
        }
    }
    for kv in &args.overrides {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        spec.set(k, v)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let spec = sweep_spec(args)?;
    if args.dry_run {
        print!("{}", spec.to_config_string());
        return Ok(());
    }
    let report = if args.f32 { run_sweep::<f32>(&spec)? } else { run_sweep::<f64>(&spec)? };
    match &spec.output {
        Some(path) => {
            write_report(&report, path, spec.slopes_output.as_deref())?;
            eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
        }
        None => print!("{}", report.to_csv_string()?),
    }
    for s in &report.slopes {
        let (lo, hi) = s.fit.ci95;
        eprintln!("slope {} {}: {:.3} [{lo:.3}, {hi:.3}]", s.strategy, s.environment, s.fit.slope);
    }
    for f in &report.failures {
        eprintln!("failed {} {} eps={}: {}", f.strategy, f.environment, f.eps, f.message);
    }
    Ok(())
}

fn fit(args: &FitArgs) -> Result<()> {
    let mut report = read_report(&args.report)?;
    add_slopes(&mut report);
    println!("{}", report.slopes_json()?);
    if args.write {
        write_report(&report, &args.report, None)?;
    }
    Ok(())
}

fn list() {
    println!("strategies:");
    for id in StrategyId::ALL {
        println!("  {:<4} {:<22} {}", id.name(), id.alias(), id.describe());
    }
    println!("environments:");
    for (name, what) in EnvironmentKind::<f64>::catalog() {
        println!("  {name:<15} {what}");
    }
}
