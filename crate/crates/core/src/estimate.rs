//! One entry point over the three Bayes engines.

use std::fmt;
use std::str::FromStr;

use crate::dgos::DgosLikelihood;
use crate::error::{Error, Result};
use crate::lindley::LindleyEstimator;
use crate::loss::LossSpec;
use crate::mcmc::{self, McmcConfig, PosteriorDraws};
use crate::mle::MleOptions;
use crate::prior::GammaPriors;
use crate::target::Target;
use crate::tk::{TkEstimator, TkOptions};
use crate::uw::ReliabilityQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Lindley,
    Tk,
    Mcmc,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Lindley, Method::Tk, Method::Mcmc];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Lindley => "lindley",
            Method::Tk => "tk",
            Method::Mcmc => "mcmc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lindley" => Ok(Method::Lindley),
            "tk" | "t-k" | "tierney-kadane" => Ok(Method::Tk),
            "mcmc" => Ok(Method::Mcmc),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Estimates of α, β and R(t) for one method and one loss. A cell is `Err`
/// with a message when its estimator failed.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    pub method: Method,
    pub loss: LossSpec,
    pub alpha: std::result::Result<f64, String>,
    pub beta: std::result::Result<f64, String>,
    pub reliability: std::result::Result<f64, String>,
}

impl EstimateSet {
    pub fn cells(&self) -> [&std::result::Result<f64, String>; 3] {
        [&self.alpha, &self.beta, &self.reliability]
    }

    pub fn successes(&self) -> usize {
        self.cells().iter().filter(|c| c.is_ok()).count()
    }
}

/// Settings shared by all engines.
#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    pub priors: GammaPriors,
    pub t: ReliabilityQuery,
    pub mle: MleOptions,
    pub tk: TkOptions,
    pub mcmc: McmcConfig,
}

impl EngineConfig {
    pub fn new(priors: GammaPriors, t: ReliabilityQuery) -> Self {
        Self {
            priors,
            t,
            mle: MleOptions::default(),
            tk: TkOptions::default(),
            mcmc: McmcConfig::default(),
        }
    }
}

/// A prepared engine: the expensive per-sample work (MLE, ψ maximum, chains)
/// is done once, then any (loss, target) pair can be evaluated.
pub enum Engine<'a> {
    Lindley(LindleyEstimator),
    Tk(TkEstimator<'a>),
    Mcmc(PosteriorDraws),
}

impl<'a> Engine<'a> {
    pub fn prepare(method: Method, lik: &'a DgosLikelihood, config: &EngineConfig) -> Result<Self> {
        Ok(match method {
            Method::Lindley => Engine::Lindley(LindleyEstimator::new(lik, &config.priors, &config.mle)?),
            Method::Tk => Engine::Tk(TkEstimator::new(lik, &config.priors, &config.tk)?),
            Method::Mcmc => {
                let chains = mcmc::run_chains(lik, &config.priors, &config.mcmc)?;
                Engine::Mcmc(PosteriorDraws::pool(&chains)?)
            }
        })
    }

    pub fn estimate(&self, loss: &LossSpec, target: &Target) -> Result<f64> {
        match self {
            Engine::Lindley(e) => e.estimate(loss, target),
            Engine::Tk(e) => e.estimate(loss, target),
            Engine::Mcmc(d) => mcmc::mcmc_estimate(d, loss, target),
        }
    }
}

/// Every (method, loss) combination, each with α, β and R(t) estimates.
pub fn estimate_grid(
    lik: &DgosLikelihood,
    config: &EngineConfig,
    methods: &[Method],
    losses: &[LossSpec],
) -> Vec<EstimateSet> {
    let mut out = Vec::with_capacity(methods.len() * losses.len());
    for &method in methods {
        let engine = Engine::prepare(method, lik, config).map_err(|e| e.to_string());
        for loss in losses {
            let cell = |target: Target| match &engine {
                Ok(e) => e.estimate(loss, &target).map_err(|e| e.to_string()),
                Err(msg) => Err(msg.clone()),
            };
            out.push(EstimateSet {
                method,
                loss: *loss,
                alpha: cell(Target::Alpha),
                beta: cell(Target::Beta),
                reliability: cell(Target::Reliability(config.t)),
            });
        }
    }
    out
}
