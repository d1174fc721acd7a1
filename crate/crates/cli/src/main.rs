use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hybrid_alloc::harness::{
    format_results, run_sweep, snr_grid, Association, ExperimentConfig, OutputFormat, Problem, Scheme, FULL_QOS_TRIALS,
    FULL_TRIALS,
};
use hybrid_alloc::minmax::CandidateOrder;

/// Monte-Carlo sweeps of hybrid semantic/Shannon resource allocation.
#[derive(Parser, Debug)]
#[command(name = "hybrid-alloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimise the sum of subcarrier delays.
    Sum(RunArgs),
    /// Minimise the largest subcarrier delay.
    Minmax(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AssocArg {
    Sst,
    Ost,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    Ascending,
    Descending,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML file mirroring the experiment config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// SNR grid in dB as lo:step:hi.
    #[arg(long, value_name = "LO:STEP:HI")]
    snr: Option<String>,
    /// Number of subcarriers.
    #[arg(long = "L", value_name = "L")]
    subcarriers: Option<usize>,
    /// Semantic symbols per word.
    #[arg(long = "k", value_name = "K")]
    symbols_per_word: Option<u32>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    qos_trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Target bit error rate, or `none` for capacity.
    #[arg(long, value_name = "RATE|none")]
    ber: Option<String>,
    #[arg(long, value_enum)]
    assoc: Option<AssocArg>,
    /// Results file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// 500 channel trials with 10 QoS draws each.
    #[arg(long)]
    full: bool,
    /// Similarity curve file.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Disable the semantic mode everywhere.
    #[arg(long)]
    shannon_only: bool,
    /// Candidate order of the min-max heuristic.
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
}

fn parse_snr(arg: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = arg.split(':').collect();
    let [lo, step, hi] = parts.as_slice() else {
        bail!("--snr expects lo:step:hi, got {arg:?}");
    };
    let num = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in --snr"));
    Ok(snr_grid(num(lo)?, num(step)?, num(hi)?)?)
}

fn parse_ber(arg: &str) -> Result<Option<f64>> {
    if arg.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let ber = arg.parse::<f64>().with_context(|| format!("bad --ber {arg:?}"))?;
    Ok(Some(ber))
}

fn build_config(problem: Problem, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    cfg.problem = problem;
    if let Some(s) = &args.snr {
        cfg.snr_points_db = parse_snr(s)?;
    }
    if args.full {
        cfg.trials = FULL_TRIALS;
        cfg.qos_trials = FULL_QOS_TRIALS;
    }
    if let Some(v) = args.subcarriers {
        cfg.subcarriers = v;
    }
    if let Some(v) = args.symbols_per_word {
        cfg.symbols_per_word = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.qos_trials {
        cfg.qos_trials = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(b) = &args.ber {
        cfg.ber = parse_ber(b)?;
    }
    if let Some(a) = args.assoc {
        cfg.association = match a {
            AssocArg::Sst => Association::Sst,
            AssocArg::Ost => Association::Ost,
        };
    }
    if let Some(c) = &args.curve {
        cfg.curve = Some(c.clone());
    }
    if args.shannon_only {
        cfg.scheme = Scheme::ShannonOnly;
    }
    if let Some(o) = args.order {
        cfg.candidate_order = match o {
            OrderArg::Ascending => CandidateOrder::Ascending,
            OrderArg::Descending => CandidateOrder::Descending,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let (problem, args) = match &cli.command {
        Command::Sum(a) => (Problem::Sum, a),
        Command::Minmax(a) => (Problem::MinMax, a),
    };
    let cfg = build_config(problem, args)?;
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Text => OutputFormat::Text,
    };
    let metrics = run_sweep(&cfg)?;
    let text = format_results(&metrics, format)?;
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
