//! Monte-Carlo risk studies of the Bayes estimators.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::dgos::{sample_dgos, DgosLikelihood, DgosScheme};
use crate::error::{Error, Result};
use crate::estimate::{EngineConfig, Engine, Method};
use crate::loss::{LossKind, LossSpec};
use crate::prior::GammaPriors;
use crate::rng;
use crate::target::Target;
use crate::uw::{ReliabilityQuery, UwParams};

pub const DEFAULT_SEED: u64 = 20_240_101;

/// Number of risk columns: {SELF, LINEX, GE} × {α, β, R(t)}.
pub const RISK_COLUMNS: usize = 9;

const LOSS_ORDER: [LossKind; 3] = [LossKind::Squared, LossKind::Linex, LossKind::GeneralEntropy];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    OrderStatistics,
    LowerRecords,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::OrderStatistics => "order_statistics",
            SchemeKind::LowerRecords => "lower_records",
        }
    }

    pub fn build(&self, n: usize) -> Result<DgosScheme> {
        match self {
            SchemeKind::OrderStatistics => DgosScheme::order_statistics(n),
            SchemeKind::LowerRecords => DgosScheme::lower_records(n),
        }
    }

    fn key(&self) -> u64 {
        match self {
            SchemeKind::OrderStatistics => 0,
            SchemeKind::LowerRecords => 1,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "order_statistics" | "os" => Ok(SchemeKind::OrderStatistics),
            "lower_records" | "records" => Ok(SchemeKind::LowerRecords),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Grid of a risk study. Parsed from flat `key = value` text; list items are
/// separated by `;` when they contain commas themselves (truths, priors) and
/// by `,` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub truths: Vec<UwParams>,
    pub sizes: Vec<usize>,
    pub schemes: Vec<SchemeKind>,
    pub priors: Vec<GammaPriors>,
    pub losses: Vec<LossKind>,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub t: f64,
    pub c: f64,
    pub seed: u64,
    pub mcmc_iterations: usize,
    pub mcmc_burn_in: usize,
    pub mcmc_chains: usize,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        let p = |a, b| UwParams::new(a, b).expect("positive");
        Self {
            truths: vec![p(1.0, 1.0), p(1.5, 1.0), p(1.0, 1.5), p(1.5, 1.5)],
            sizes: vec![5, 10, 15],
            schemes: vec![SchemeKind::OrderStatistics, SchemeKind::LowerRecords],
            priors: vec![GammaPriors::prior_one(), GammaPriors::prior_two()],
            losses: LOSS_ORDER.to_vec(),
            methods: Method::ALL.to_vec(),
            replications: 1000,
            t: 0.5,
            c: 0.5,
            seed: DEFAULT_SEED,
            mcmc_iterations: 11_000,
            mcmc_burn_in: 1_000,
            mcmc_chains: 2,
        }
    }
}

fn parse_list<T>(value: &str, sep: char, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(sep).map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{}`", v.trim())))
}

impl SimulationPlan {
    /// Parses plan text; keys that are not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut plan = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            match key {
                "truths" => {
                    plan.truths = parse_list(value, ';', |s| {
                        let s = s.trim_start_matches('(').trim_end_matches(')');
                        let (a, b) = s
                            .split_once(',')
                            .ok_or_else(|| Error::Config(format!("truth `{s}` must be `alpha,beta`")))?;
                        UwParams::new(parse_num(key, a)?, parse_num(key, b)?)
                    })?
                }
                "sizes" => plan.sizes = parse_list(value, ',', |s| parse_num(key, s))?,
                "schemes" => plan.schemes = parse_list(value, ',', SchemeKind::from_str)?,
                "priors" => plan.priors = parse_list(value, ';', GammaPriors::from_str)?,
                "losses" => plan.losses = parse_list(value, ',', LossKind::parse)?,
                "methods" => plan.methods = parse_list(value, ',', Method::from_str)?,
                "replications" => plan.replications = parse_num(key, value)?,
                "t" => plan.t = parse_num(key, value)?,
                "c" => plan.c = parse_num(key, value)?,
                "seed" => plan.seed = parse_num(key, value)?,
                "mcmc_iterations" => plan.mcmc_iterations = parse_num(key, value)?,
                "mcmc_burn_in" => plan.mcmc_burn_in = parse_num(key, value)?,
                "mcmc_chains" => plan.mcmc_chains = parse_num(key, value)?,
                other => return Err(Error::Config(format!("unknown plan key `{other}`"))),
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("truths", self.truths.is_empty()),
            ("sizes", self.sizes.is_empty()),
            ("schemes", self.schemes.is_empty()),
            ("priors", self.priors.is_empty()),
            ("losses", self.losses.is_empty()),
            ("methods", self.methods.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!("plan has an empty `{name}` list")));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        ReliabilityQuery::new(self.t)?;
        self.loss_specs()?;
        self.mcmc_config(0).validate()?;
        Ok(())
    }

    /// The requested losses, in table order, with the plan's constant c.
    pub fn loss_specs(&self) -> Result<Vec<LossSpec>> {
        let kinds: BTreeSet<LossKind> = self.losses.iter().copied().collect();
        kinds.into_iter().map(|k| LossSpec::new(k, self.c)).collect()
    }

    fn mcmc_config(&self, seed: u64) -> crate::mcmc::McmcConfig {
        crate::mcmc::McmcConfig {
            total_iterations: self.mcmc_iterations,
            burn_in: self.mcmc_burn_in,
            chains: self.mcmc_chains,
            seed,
            ..Default::default()
        }
    }

    /// Number of (truth, n, scheme, prior, method) cells.
    pub fn cell_count(&self) -> usize {
        self.truths.len() * self.sizes.len() * self.schemes.len() * self.priors.len() * self.methods.len()
    }
}

/// Risks for one (truth, n) within a block; `None` where no replication
/// succeeded or the loss was not requested.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub truth: UwParams,
    pub n: usize,
    pub risks: [Option<f64>; RISK_COLUMNS],
    pub failures: [usize; RISK_COLUMNS],
    pub replications: usize,
}

impl RiskRow {
    /// Largest failure count over the columns.
    pub fn replication_failures(&self) -> usize {
        self.failures.iter().copied().max().unwrap_or(0)
    }

    /// True when some column failed in at least `rate` of the replications.
    pub fn flagged(&self, rate: f64) -> bool {
        self.replications > 0 && self.replication_failures() as f64 >= rate * self.replications as f64
    }
}

/// Rows sharing a method, scheme and prior.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskBlock {
    pub method: Method,
    pub scheme: SchemeKind,
    pub prior: GammaPriors,
    pub rows: Vec<RiskRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskTable {
    pub blocks: Vec<RiskBlock>,
}

impl RiskTable {
    pub fn find(&self, method: Method, scheme: SchemeKind, prior: &GammaPriors) -> Option<&RiskBlock> {
        self.blocks.iter().find(|b| b.method == method && b.scheme == scheme && b.prior == *prior)
    }
}

pub fn column_index(loss: LossKind, target: usize) -> usize {
    LOSS_ORDER.iter().position(|k| *k == loss).expect("known loss") * 3 + target
}

/// What an estimator sees in one replication.
pub struct ReplicationInput<'a> {
    pub lik: &'a DgosLikelihood,
    pub truth: UwParams,
    pub priors: GammaPriors,
    pub method: Method,
    pub losses: &'a [LossSpec],
    pub t: ReliabilityQuery,
    pub mcmc: crate::mcmc::McmcConfig,
}

/// Estimates of (α, β, R(t)) per requested loss; `None` marks a failure.
pub type ReplicationEstimates = Vec<[Option<f64>; 3]>;

/// The Bayes engines of this crate.
pub fn bayes_estimates(input: &ReplicationInput<'_>) -> ReplicationEstimates {
    let mut config = EngineConfig::new(input.priors, input.t);
    config.mcmc = input.mcmc;
    let targets = Target::standard_set(input.t);
    match Engine::prepare(input.method, input.lik, &config) {
        Ok(engine) => input
            .losses
            .iter()
            .map(|loss| targets.map(|tg| engine.estimate(loss, &tg).ok()))
            .collect(),
        Err(_) => vec![[None; 3]; input.losses.len()],
    }
}

pub fn run_plan(plan: &SimulationPlan) -> Result<RiskTable> {
    run_plan_with(plan, bayes_estimates)
}

/// Runs `plan` with an arbitrary estimator. Data for replication `r` of a
/// (truth, n, scheme) group comes from its own seed-derived stream, shared by
/// every prior and method, so results do not depend on thread scheduling.
pub fn run_plan_with<F>(plan: &SimulationPlan, estimator: F) -> Result<RiskTable>
where
    F: Fn(&ReplicationInput<'_>) -> ReplicationEstimates + Sync,
{
    plan.validate()?;
    let losses = plan.loss_specs()?;
    let t = ReliabilityQuery::new(plan.t)?;
    let mut groups = Vec::new();
    for &scheme in &plan.schemes {
        for &truth in &plan.truths {
            for &n in &plan.sizes {
                groups.push((scheme, truth, n, scheme.build(n)?));
            }
        }
    }
    let inner: Vec<(usize, usize)> = (0..plan.priors.len())
        .flat_map(|p| (0..plan.methods.len()).map(move |m| (p, m)))
        .collect();

    let jobs: Vec<(usize, usize)> =
        (0..groups.len()).flat_map(|g| (0..plan.replications).map(move |r| (g, r))).collect();
    let results: Vec<Vec<[Option<f64>; RISK_COLUMNS]>> = jobs
        .par_iter()
        .map(|&(g, rep)| {
            let (scheme, truth, n, ref dgos) = groups[g];
            let keys = [0, truth.alpha().to_bits(), truth.beta().to_bits(), n as u64, scheme.key(), rep as u64];
            let mut r = rng::stream(plan.seed, &keys);
            let sample = sample_dgos(&mut r, dgos, &truth);
            let lik = DgosLikelihood::new(&sample, dgos);
            inner
                .iter()
                .map(|&(pi, mi)| {
                    let mut row = [None; RISK_COLUMNS];
                    let Ok(lik) = &lik else { return row };
                    let prior = plan.priors[pi];
                    let mut mkeys = keys.to_vec();
                    mkeys[0] = 1;
                    mkeys.extend([prior.a1, prior.b1, prior.a2, prior.b2].map(f64::to_bits));
                    let input = ReplicationInput {
                        lik,
                        truth,
                        priors: prior,
                        method: plan.methods[mi],
                        losses: &losses,
                        t,
                        mcmc: plan.mcmc_config(rng::derive_seed(plan.seed, &mkeys)),
                    };
                    let est = estimator(&input);
                    let truths = [truth.alpha(), truth.beta(), truth.reliability(t)];
                    for (loss, values) in losses.iter().zip(&est) {
                        for k in 0..3 {
                            row[column_index(loss.kind(), k)] =
                                values[k].and_then(|e| loss.loss_value(e, truths[k]).ok()).filter(|v| v.is_finite());
                        }
                    }
                    row
                })
                .collect()
        })
        .collect();

    let requested: Vec<usize> = losses.iter().flat_map(|l| (0..3).map(move |k| column_index(l.kind(), k))).collect();
    let mut blocks = Vec::new();
    for &scheme in &plan.schemes {
        for (pi, prior) in plan.priors.iter().enumerate() {
            for (mi, &method) in plan.methods.iter().enumerate() {
                let slot = inner.iter().position(|&x| x == (pi, mi)).expect("slot");
                let mut rows = Vec::new();
                for (g, (gs, truth, n, _)) in groups.iter().enumerate() {
                    if *gs != scheme {
                        continue;
                    }
                    let mut sums = [0.0; RISK_COLUMNS];
                    let mut ok = [0usize; RISK_COLUMNS];
                    for rep in 0..plan.replications {
                        let row = &results[g * plan.replications + rep][slot];
                        for c in 0..RISK_COLUMNS {
                            if let Some(v) = row[c] {
                                sums[c] += v;
                                ok[c] += 1;
                            }
                        }
                    }
                    let mut risks = [None; RISK_COLUMNS];
                    let mut failures = [0; RISK_COLUMNS];
                    for &c in &requested {
                        failures[c] = plan.replications - ok[c];
                        if ok[c] > 0 {
                            risks[c] = Some(sums[c] / ok[c] as f64);
                        }
                    }
                    if requested.iter().all(|&c| ok[c] == 0) {
                        return Err(Error::PlanInfeasible(format!(
                            "no successful replication for method={method} scheme={scheme} prior={prior} truth={} n={n}",
                            truth_label(truth)
                        )));
                    }
                    rows.push(RiskRow { truth: *truth, n: *n, risks, failures, replications: plan.replications });
                }
                blocks.push(RiskBlock { method, scheme, prior: *prior, rows });
            }
        }
    }
    Ok(RiskTable { blocks })
}

pub fn truth_label(p: &UwParams) -> String {
    format!("({},{})", p.alpha(), p.beta())
}

pub fn header() -> Vec<String> {
    let mut h = vec!["truth".to_string(), "n".to_string()];
    for k in LOSS_ORDER {
        for t in ["alpha", "beta", "R"] {
            h.push(format!("{}_{t}", k.label()));
        }
    }
    h
}

/// Failure rate at or above which a row is flagged in the output.
pub const FLAG_RATE: f64 = 0.05;

/// Writes the table as CSV: one header line, then per block a `# method=…
/// scheme=… prior=…` comment followed by one row per (truth, n). Risks use
/// six decimals and `NA` marks empty cells. Rows whose failure rate reaches
/// [`FLAG_RATE`] are followed by a `# flagged` comment.
pub fn emit_table<W: Write>(table: &RiskTable, mut out: W) -> Result<()> {
    writeln!(out, "{}", header().join(","))?;
    for b in &table.blocks {
        writeln!(out, "# method={} scheme={} prior={}", b.method, b.scheme, b.prior)?;
        for row in &b.rows {
            let mut line = format!("\"{}\",{}", truth_label(&row.truth), row.n);
            for r in &row.risks {
                match r {
                    Some(v) => line.push_str(&format!(",{v:.6}")),
                    None => line.push_str(",NA"),
                }
            }
            writeln!(out, "{line}")?;
            if row.flagged(FLAG_RATE) {
                writeln!(
                    out,
                    "# flagged truth={} n={} failures={}/{}",
                    truth_label(&row.truth),
                    row.n,
                    row.replication_failures(),
                    row.replications
                )?;
            }
        }
    }
    Ok(())
}

/// Reads a table written by [`emit_table`]. Failure counts are restored
/// only for flagged rows.
pub fn parse_table<R: BufRead>(input: R) -> Result<RiskTable> {
    let mut table = RiskTable::default();
    let mut lines = input.lines();
    let head = lines.next().transpose()?.unwrap_or_default();
    if head.trim() != header().join(",") {
        return Err(Error::Config("risk table header does not match".into()));
    }
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let kv: Vec<(&str, &str)> = rest.split_whitespace().filter_map(|w| w.split_once('=')).collect();
            let get = |k: &str| kv.iter().find(|(a, _)| *a == k).map(|(_, v)| *v);
            if rest.trim_start().starts_with("flagged") {
                let (bad, total) = get("failures")
                    .and_then(|f| f.split_once('/'))
                    .ok_or_else(|| Error::Config(format!("malformed flag line `{line}`")))?;
                let row = table
                    .blocks
                    .last_mut()
                    .and_then(|b| b.rows.last_mut())
                    .ok_or_else(|| Error::Config("flag line before any row".into()))?;
                row.failures = [parse_num("failures", bad)?; RISK_COLUMNS];
                row.replications = parse_num("failures", total)?;
                continue;
            }
            let field = |k: &str| get(k).ok_or_else(|| Error::Config(format!("block line lacks `{k}`")));
            table.blocks.push(RiskBlock {
                method: field("method")?.parse()?,
                scheme: field("scheme")?.parse()?,
                prior: field("prior")?.parse()?,
                rows: Vec::new(),
            });
            continue;
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        let rec = rdr
            .records()
            .next()
            .transpose()?
            .ok_or_else(|| Error::Config(format!("empty row `{line}`")))?;
        if rec.len() != 2 + RISK_COLUMNS {
            return Err(Error::Config(format!("row has {} fields, expected {}", rec.len(), 2 + RISK_COLUMNS)));
        }
        let t = rec[0].trim_start_matches('(').trim_end_matches(')');
        let (a, b) = t.split_once(',').ok_or_else(|| Error::Config(format!("bad truth `{}`", &rec[0])))?;
        let mut risks = [None; RISK_COLUMNS];
        for (c, r) in risks.iter_mut().enumerate() {
            let v = &rec[2 + c];
            if v != "NA" {
                *r = Some(parse_num("risk", v)?);
            }
        }
        let row = RiskRow {
            truth: UwParams::new(parse_num("truth", a)?, parse_num("truth", b)?)?,
            n: parse_num("n", &rec[1])?,
            risks,
            failures: [0; RISK_COLUMNS],
            replications: 0,
        };
        table
            .blocks
            .last_mut()
            .ok_or_else(|| Error::Config("row before any block line".into()))?
            .rows
            .push(row);
    }
    Ok(table)
}
