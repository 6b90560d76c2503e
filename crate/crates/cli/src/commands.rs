use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use uwbayes::data::{self, Dataset, PipelineConfig};
use uwbayes::estimate::{estimate_grid, EngineConfig};
use uwbayes::mcmc::{gelman_rubin, run_chains, write_chains_csv, McmcConfig};
use uwbayes::risk::{emit_table, run_plan, SchemeKind, SimulationPlan, FLAG_RATE};
use uwbayes::{rng, sample_dgos, DgosLikelihood, DgosSample, Error, LossSpec, ReliabilityQuery, Result, UwParams};

use crate::{AnalyzeArgs, DiagnoseArgs, EstimateArgs, GenerateArgs, McmcArgs, ModelArgs, SimulateArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

const DEFAULT_PLAN: &str = include_str!("../plans/default.plan");

/// Numerical failures exit with 2, everything else with the usage code.
pub fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::NoConvergence { .. }
        | Error::NonConcaveAtOptimum
        | Error::ApproximationOutOfRange(_)
        | Error::InvalidEstimate(_)
        | Error::PlanInfeasible(_) => ExitCode::from(EXIT_NUMERICAL),
        _ => ExitCode::from(EXIT_USAGE),
    }
}

/// Machine output goes to `path`, or to stdout when there is none.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// The summary shares stdout only when the machine output went to a file.
struct Summary {
    quiet: bool,
    to_stdout: bool,
}

impl Summary {
    fn new(quiet: bool, output: Option<&Path>) -> Self {
        Self { quiet, to_stdout: output.is_some() }
    }

    fn line(&self, text: impl AsRef<str>) {
        if self.quiet {
            return;
        }
        if self.to_stdout {
            println!("{}", text.as_ref());
        } else {
            eprintln!("{}", text.as_ref());
        }
    }
}

fn mcmc_config(args: &McmcArgs) -> McmcConfig {
    McmcConfig {
        total_iterations: args.iterations,
        burn_in: args.burn_in,
        chains: args.chains,
        seed: args.seed,
        ..Default::default()
    }
}

fn read_dataset(path: &Path, transform: bool) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    let ds = Dataset::read_csv(file, path.display().to_string())?;
    if transform {
        data::transform_unit(&ds)
    } else {
        Ok(ds)
    }
}

/// Order statistics are sorted into descending order; records must already
/// be non-increasing since their order carries the information.
fn dgos_sample(ds: &Dataset, model: SchemeKind) -> Result<DgosSample> {
    match model {
        SchemeKind::OrderStatistics => ds.descending_sample(),
        SchemeKind::LowerRecords => DgosSample::new(ds.values().to_vec()),
    }
}

fn loss_specs(args: &ModelArgs) -> Result<Vec<LossSpec>> {
    let mut kinds = args.losses.clone();
    kinds.sort();
    kinds.dedup();
    kinds.into_iter().map(|k| LossSpec::new(k, args.c)).collect()
}

pub fn generate(args: &GenerateArgs, quiet: bool) -> Result<ExitCode> {
    let truth = UwParams::new(args.alpha, args.beta)?;
    let scheme = args.model.build(args.n as usize)?;
    let mut out = sink(args.output.as_deref())?;
    let header: Vec<String> = (1..=args.n).map(|i| format!("x{i}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for rep in 0..args.reps {
        let mut r = rng::stream(args.seed, &[rep]);
        let sample = sample_dgos(&mut r, &scheme, &truth);
        let row: Vec<String> = sample.values().iter().map(|v| format!("{v:.6e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Summary::new(quiet, args.output.as_deref())
        .line(format!("generated {} {} samples of size {}", args.reps, args.model, args.n));
    Ok(ExitCode::SUCCESS)
}

pub fn estimate(args: &EstimateArgs, quiet: bool) -> Result<ExitCode> {
    let m = &args.model_args;
    let ds = read_dataset(&args.data, args.transform)?;
    let sample = dgos_sample(&ds, args.model)?;
    let scheme = args.model.build(sample.len())?;
    let lik = DgosLikelihood::new(&sample, &scheme)?;
    let losses = loss_specs(m)?;
    let mut cfg = EngineConfig::new(m.prior, ReliabilityQuery::new(m.t)?);
    cfg.mcmc = mcmc_config(&m.mcmc);
    let sets = estimate_grid(&lik, &cfg, &m.methods, &losses);
    let mut out = sink(args.output.as_deref())?;
    data::write_estimates(&mut out, &sets)?;
    out.flush()?;

    let ok: usize = sets.iter().map(|s| s.successes()).sum();
    let total = 3 * sets.len();
    let summary = Summary::new(quiet, args.output.as_deref());
    summary.line(format!("{} {} values, prior {}: {ok}/{total} cells estimated", sample.len(), args.model, m.prior));
    for s in &sets {
        for (name, cell) in ["alpha", "beta", "R"].iter().zip(s.cells()) {
            if let Err(msg) = cell {
                summary.line(format!("  {} {} {name}: {msg}", s.method, s.loss.kind().label()));
            }
        }
    }
    Ok(if ok == 0 && total > 0 { ExitCode::from(EXIT_NUMERICAL) } else { ExitCode::SUCCESS })
}

pub fn simulate(args: &SimulateArgs, quiet: bool) -> Result<ExitCode> {
    let text = match &args.plan {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None => DEFAULT_PLAN.to_string(),
    };
    let mut plan = SimulationPlan::parse(&text)?;
    if let Some(r) = args.replications {
        plan.replications = r;
    }
    if let Some(s) = args.seed {
        plan.seed = s;
    }
    plan.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let table = pool.install(|| run_plan(&plan))?;
    let mut out = sink(args.output.as_deref())?;
    emit_table(&table, &mut out)?;
    out.flush()?;

    let summary = Summary::new(quiet, args.output.as_deref());
    let rows: Vec<_> = table.blocks.iter().flat_map(|b| &b.rows).collect();
    let flagged = rows.iter().filter(|r| r.flagged(FLAG_RATE)).count();
    summary.line(format!(
        "{} cells, {} rows, {} replications each, {flagged} rows flagged for failure rate >= {FLAG_RATE}",
        plan.cell_count(),
        rows.len(),
        plan.replications
    ));
    Ok(ExitCode::SUCCESS)
}

/// Checkpoints 100, 1000, ... up to `iterations`, plus `iterations` itself.
fn checkpoints(iterations: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(100usize), |k| k.checked_mul(10))
        .take_while(|&k| k <= iterations)
        .collect();
    if out.last() != Some(&iterations) {
        out.push(iterations);
    }
    out
}

pub fn diagnose(args: &DiagnoseArgs, quiet: bool) -> Result<ExitCode> {
    let sample = match &args.data {
        Some(p) => dgos_sample(&read_dataset(p, args.transform)?, args.model)?,
        None => {
            let unit = data::transform_unit(&Dataset::cotton())?;
            DgosSample::new(data::extract_lower_records(&unit).values().to_vec())?
        }
    };
    let model = if args.data.is_some() { args.model } else { SchemeKind::LowerRecords };
    let scheme = model.build(sample.len())?;
    let lik = DgosLikelihood::new(&sample, &scheme)?;
    let cfg = McmcConfig {
        total_iterations: args.iterations,
        burn_in: 0,
        chains: args.chains as usize,
        seed: args.seed,
        ..Default::default()
    };
    let chains = run_chains(&lik, &args.prior, &cfg)?;

    let mut out = sink(args.output.as_deref())?;
    writeln!(out, "iteration,gr_alpha,gr_beta")?;
    let summary = Summary::new(quiet, args.output.as_deref());
    summary.line(format!("{} chains on {} {model} values, prior {}", chains.len(), sample.len(), args.prior));
    for k in checkpoints(args.iterations) {
        // The first half of each prefix is treated as warm-up.
        let a: Vec<&[f64]> = chains.iter().map(|c| &c.alpha()[k / 2..k]).collect();
        let b: Vec<&[f64]> = chains.iter().map(|c| &c.beta()[k / 2..k]).collect();
        let (ra, rb) = (gelman_rubin(&a)?, gelman_rubin(&b)?);
        writeln!(out, "{k},{ra:.6},{rb:.6}")?;
        summary.line(format!("  {k:>8} iterations: R_alpha = {ra:.4}, R_beta = {rb:.4}"));
    }
    out.flush()?;
    for (i, c) in chains.iter().enumerate() {
        summary.line(format!(
            "  chain {i}: beta acceptance {:.3}, proposal sd {:.4}",
            c.acceptance_rate_beta(),
            c.proposal_sd()
        ));
    }
    if let Some(p) = &args.draws {
        let mut w = BufWriter::new(File::create(p)?);
        write_chains_csv(&mut w, &chains)?;
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn analyze_cotton(args: &AnalyzeArgs, quiet: bool) -> Result<ExitCode> {
    let m = &args.model_args;
    let config = PipelineConfig {
        priors: m.prior,
        c: m.c,
        t: m.t,
        methods: m.methods.clone(),
        losses: m.losses.clone(),
        mcmc: mcmc_config(&m.mcmc),
        sorted_records: args.sorted_records,
    };
    let report = data::analyze_cotton(&config)?;
    let mut out = sink(args.output.as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;

    let summary = Summary::new(quiet, args.output.as_deref());
    summary.line(format!("{} observations, {} lower records", report.data.len(), report.records.len()));
    for f in &report.fits {
        let params: Vec<String> = f.fitted.parameters().iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
        summary.line(format!(
            "  {:<13} {:<28} logL {:>9.4}  AIC {:>8.4}  BIC {:>8.4}",
            f.distribution().to_string(),
            params.join(" "),
            f.log_likelihood,
            f.aic,
            f.bic
        ));
    }
    for (name, ks) in [("weibull", report.ks_weibull), ("unit-weibull", report.ks_unit_weibull)] {
        if let Some(k) = ks {
            summary.line(format!("  KS {name}: D = {:.4}, p = {:.4}", k.d, k.p_value));
        }
    }
    let ok: usize = report.order_statistics.iter().chain(&report.record_estimates).map(|s| s.successes()).sum();
    let total = 3 * (report.order_statistics.len() + report.record_estimates.len());
    summary.line(format!("  {ok}/{total} Bayes estimate cells succeeded"));
    Ok(if ok == 0 && total > 0 { ExitCode::from(EXIT_NUMERICAL) } else { ExitCode::SUCCESS })
}
