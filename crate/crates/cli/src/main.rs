mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uwbayes::risk::{SchemeKind, DEFAULT_SEED};
use uwbayes::{GammaPriors, LossKind, Method};

/// Bayesian estimation for the Unit-Weibull distribution from ordered data.
#[derive(Debug, Parser)]
#[command(name = "uwbayes", version)]
struct Cli {
    /// Suppress the human-readable summary.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate dgos samples, one row per replication.
    Generate(GenerateArgs),
    /// Bayes estimates of α, β and R(t) from a data file.
    Estimate(EstimateArgs),
    /// Monte-Carlo risk study driven by a plan file.
    Simulate(SimulateArgs),
    /// Gelman-Rubin convergence report for parallel MCMC chains.
    Diagnose(DiagnoseArgs),
    /// Classical fits, KS tests and Bayes estimates for the cotton data.
    AnalyzeCotton(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Sub-model: `records` or `order-statistics`.
    #[arg(long, value_parser = parse_scheme)]
    model: SchemeKind,
    /// Sample size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    /// Number of replications (rows).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Prior hyperparameters `a1,b1,a2,b2`.
    #[arg(long, default_value = "2,2,2,2", value_parser = parse_priors)]
    prior: GammaPriors,
    /// LINEX / GE loss constant.
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Time at which R(t) is estimated.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Comma-separated methods: lindley, tk, mcmc.
    #[arg(long, value_delimiter = ',', default_value = "lindley,tk,mcmc", value_parser = parse_method)]
    methods: Vec<Method>,
    /// Comma-separated losses: self, linex, ge.
    #[arg(long, value_delimiter = ',', default_value = "self,linex,ge", value_parser = parse_loss)]
    losses: Vec<LossKind>,
    #[command(flatten)]
    mcmc: McmcArgs,
}

#[derive(Debug, Args)]
struct McmcArgs {
    /// MCMC iterations per chain, burn-in included.
    #[arg(long, default_value_t = 11_000)]
    iterations: usize,
    #[arg(long, default_value_t = 1_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 2)]
    chains: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// One-column CSV with header `x` or `value`.
    data: PathBuf,
    /// Sub-model: `records` or `order-statistics`.
    #[arg(long, value_parser = parse_scheme)]
    model: SchemeKind,
    /// Map each value v to e^(−v) before estimating.
    #[arg(long)]
    transform: bool,
    #[command(flatten)]
    model_args: ModelArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Plan file of `key = value` lines; the bundled full study when omitted.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Override the plan's replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Override the plan's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    /// Data file; the cotton lower records when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Sub-model of `--data`.
    #[arg(long, default_value = "records", value_parser = parse_scheme)]
    model: SchemeKind,
    /// Map each value v to e^(−v) before sampling.
    #[arg(long)]
    transform: bool,
    #[arg(long, default_value = "2,2,2,2", value_parser = parse_priors)]
    prior: GammaPriors,
    /// Number of chains, at least two.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    chains: u64,
    /// Iterations per chain.
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write every draw to this CSV.
    #[arg(long)]
    draws: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Take the records as the sorted distinct values instead of running minima.
    #[arg(long)]
    sorted_records: bool,
    #[command(flatten)]
    model_args: ModelArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    s.parse().map_err(|e: uwbayes::Error| e.to_string())
}

fn parse_priors(s: &str) -> Result<GammaPriors, String> {
    s.parse().map_err(|e: uwbayes::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: uwbayes::Error| e.to_string())
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    LossKind::parse(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a, cli.quiet),
        Command::Estimate(a) => commands::estimate(a, cli.quiet),
        Command::Simulate(a) => commands::simulate(a, cli.quiet),
        Command::Diagnose(a) => commands::diagnose(a, cli.quiet),
        Command::AnalyzeCotton(a) => commands::analyze_cotton(a, cli.quiet),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            commands::exit_code(&e)
        }
    }
}
