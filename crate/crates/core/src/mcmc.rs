//! Metropolis-within-Gibbs sampling of the joint posterior.
//!
//! α | β is Gamma(n + a1, rate b1 + S(β)) and is drawn exactly. β | α has
//! log-kernel `(n + a2 − 1) ln β + (β − 1) Σ ln(−ln x_i) − b2 β − α S(β)` and is
//! updated by a random-walk normal proposal on β; non-positive proposals are
//! rejected.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Open01};
use rayon::prelude::*;

use crate::dgos::DgosLikelihood;
use crate::error::{Error, Result};
use crate::loss::{LossKind, LossSpec};
use crate::mle::{self, MleOptions};
use crate::prior::GammaPriors;
use crate::rng;
use crate::target::Target;
use crate::uw::UwParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    pub total_iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    /// Random-walk scale for β; `None` tunes it with a pilot run.
    pub proposal_sd: Option<f64>,
    pub pilot_steps: usize,
    pub chains: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            total_iterations: 11_000,
            burn_in: 1_000,
            thinning: 1,
            proposal_sd: None,
            pilot_steps: 500,
            chains: 2,
            seed: 20_240_101,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 || self.chains == 0 {
            return Err(Error::Config("thinning and chains must be positive".into()));
        }
        if self.burn_in >= self.total_iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.total_iterations
            )));
        }
        if (self.total_iterations - self.burn_in) / self.thinning < 100 {
            return Err(Error::Config(format!(
                "only {} draws would be retained, at least 100 are required",
                (self.total_iterations - self.burn_in) / self.thinning
            )));
        }
        if let Some(sd) = self.proposal_sd {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::Config(format!("proposal sd must be positive, got {sd}")));
            }
        }
        Ok(())
    }

    /// Draws kept per chain.
    pub fn retained(&self) -> usize {
        (self.total_iterations - self.burn_in).div_ceil(self.thinning)
    }
}

/// Retained draws of one chain (or several pooled chains).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    acceptance_rate_beta: f64,
    proposal_sd: f64,
    first_iteration: usize,
    thinning: usize,
}

impl PosteriorDraws {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, acceptance_rate_beta: f64) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::InvalidParameter(
                "draw lists must be nonempty and of equal length".into(),
            ));
        }
        if alpha.iter().chain(&beta).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("draws must be positive".into()));
        }
        Ok(Self { alpha, beta, acceptance_rate_beta, proposal_sd: f64::NAN, first_iteration: 0, thinning: 1 })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn acceptance_rate_beta(&self) -> f64 {
        self.acceptance_rate_beta
    }

    /// The proposal scale used after tuning.
    pub fn proposal_sd(&self) -> f64 {
        self.proposal_sd
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Sampler iteration that produced draw `i`.
    pub fn iteration(&self, i: usize) -> usize {
        self.first_iteration + i * self.thinning
    }

    pub fn target_values(&self, target: &Target) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| target.value(&UwParams::new(a, b).expect("draws are positive")))
            .collect()
    }

    /// Concatenates chains; the acceptance rate is the draw-weighted mean.
    pub fn pool(chains: &[PosteriorDraws]) -> Result<Self> {
        let total: usize = chains.iter().map(|c| c.len()).sum();
        if total == 0 {
            return Err(Error::InvalidParameter("no draws to pool".into()));
        }
        let mut alpha = Vec::with_capacity(total);
        let mut beta = Vec::with_capacity(total);
        let mut acc = 0.0;
        for c in chains {
            alpha.extend_from_slice(&c.alpha);
            beta.extend_from_slice(&c.beta);
            acc += c.acceptance_rate_beta * c.len() as f64;
        }
        let mut out = Self::new(alpha, beta, acc / total as f64)?;
        out.proposal_sd = chains[0].proposal_sd;
        Ok(out)
    }
}

/// One draw from Gamma(n + a1, rate b1 + S(β)).
pub fn sample_alpha_conditional<R: Rng + ?Sized>(
    rng: &mut R,
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    beta: f64,
) -> f64 {
    draw_alpha(rng, lik, priors, lik.s(beta))
}

fn draw_alpha<R: Rng + ?Sized>(rng: &mut R, lik: &DgosLikelihood, priors: &GammaPriors, s: f64) -> f64 {
    let shape = lik.n() as f64 + priors.a1;
    let gamma = Gamma::new(shape, 1.0 / (priors.b1 + s)).expect("positive shape and rate");
    loop {
        let a = gamma.sample(rng);
        if a > 0.0 {
            return a;
        }
    }
}

/// Log-kernel of β | α (up to a constant) and `S(β)`.
pub fn beta_log_kernel(lik: &DgosLikelihood, priors: &GammaPriors, alpha: f64, beta: f64) -> f64 {
    beta_kernel(lik, priors, alpha, beta).0
}

fn beta_kernel(lik: &DgosLikelihood, priors: &GammaPriors, alpha: f64, beta: f64) -> (f64, f64) {
    let n = lik.n() as f64;
    let s = lik.s(beta);
    let k = (n + priors.a2 - 1.0) * beta.ln() + (beta - 1.0) * lik.sum_ln_y() - priors.b2 * beta - alpha * s;
    (k, s)
}

/// Metropolis accept/reject of a given proposal `beta_prop`.
pub fn mh_accept<R: Rng + ?Sized>(
    rng: &mut R,
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    alpha: f64,
    beta_current: f64,
    beta_prop: f64,
) -> (f64, bool) {
    let cur = beta_kernel(lik, priors, alpha, beta_current).0;
    let (next, accepted, _) = accept_with_kernel(rng, lik, priors, alpha, beta_current, cur, beta_prop);
    (next, accepted)
}

fn accept_with_kernel<R: Rng + ?Sized>(
    rng: &mut R,
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    alpha: f64,
    beta: f64,
    kernel: f64,
    prop: f64,
) -> (f64, bool, Option<(f64, f64)>) {
    if prop.is_nan() || prop <= 0.0 {
        return (beta, false, None);
    }
    let (kp, sp) = beta_kernel(lik, priors, alpha, prop);
    let u: f64 = rng.sample(Open01);
    if kp.is_finite() && u.ln() < kp - kernel {
        (prop, true, Some((kp, sp)))
    } else {
        (beta, false, None)
    }
}

/// One random-walk Metropolis update of β at fixed α.
pub fn mh_step_beta<R: Rng + ?Sized>(
    rng: &mut R,
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    alpha: f64,
    beta_current: f64,
    proposal_sd: f64,
) -> (f64, bool) {
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    mh_accept(rng, lik, priors, alpha, beta_current, beta_current + proposal_sd * z)
}

/// Sequential Gibbs state that caches the β-kernel between updates.
struct Sampler<'a> {
    lik: &'a DgosLikelihood,
    priors: &'a GammaPriors,
    alpha: f64,
    beta: f64,
    s: f64,
}

impl<'a> Sampler<'a> {
    fn new(lik: &'a DgosLikelihood, priors: &'a GammaPriors, beta: f64) -> Self {
        Self { lik, priors, alpha: f64::NAN, beta, s: lik.s(beta) }
    }

    /// α draw followed by one β update; returns whether β moved.
    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R, sd: f64) -> bool {
        self.alpha = draw_alpha(rng, self.lik, self.priors, self.s);
        let n = self.lik.n() as f64;
        let pr = self.priors;
        let kernel = (n + pr.a2 - 1.0) * self.beta.ln() + (self.beta - 1.0) * self.lik.sum_ln_y()
            - pr.b2 * self.beta
            - self.alpha * self.s;
        let normal = Normal::new(0.0, sd).expect("positive sd");
        let prop = self.beta + normal.sample(rng);
        let (next, accepted, cache) = accept_with_kernel(rng, self.lik, pr, self.alpha, self.beta, kernel, prop);
        if let Some((_, s)) = cache {
            self.beta = next;
            self.s = s;
        }
        accepted
    }
}

/// Tunes the β proposal scale towards a 0.2–0.5 acceptance rate with batched
/// multiplicative updates. Returns the scale and the final state of β.
pub fn tune_proposal<R: Rng + ?Sized>(
    rng: &mut R,
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    beta_start: f64,
    steps: usize,
) -> (f64, f64) {
    const BATCH: usize = 50;
    let mut state = Sampler::new(lik, priors, beta_start);
    let mut sd = 0.25 * beta_start.max(1e-3);
    let mut done = 0;
    while done < steps {
        let len = BATCH.min(steps - done);
        let accepted = (0..len).filter(|_| state.sweep(rng, sd)).count();
        let rate = accepted as f64 / len as f64;
        if !(0.2..=0.5).contains(&rate) {
            sd *= (2.5 * (rate - 0.35)).exp();
        }
        done += len;
    }
    (sd, state.beta)
}

/// One chain started at `beta_start`.
pub fn run_chain<R: Rng + ?Sized>(
    rng: &mut R,
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    config: &McmcConfig,
    beta_start: f64,
) -> Result<PosteriorDraws> {
    config.validate()?;
    if !(beta_start > 0.0 && beta_start.is_finite()) {
        return Err(Error::domain("beta_start", beta_start, "(0, inf)"));
    }
    let (sd, start) = match config.proposal_sd {
        Some(sd) => (sd, beta_start),
        None => tune_proposal(rng, lik, priors, beta_start, config.pilot_steps),
    };
    let mut state = Sampler::new(lik, priors, start);
    let keep = config.retained();
    let mut alpha = Vec::with_capacity(keep);
    let mut beta = Vec::with_capacity(keep);
    let mut accepted = 0usize;
    for it in 0..config.total_iterations {
        if state.sweep(rng, sd) {
            accepted += 1;
        }
        if it >= config.burn_in && (it - config.burn_in).is_multiple_of(config.thinning) {
            alpha.push(state.alpha);
            beta.push(state.beta);
        }
    }
    let mut draws = PosteriorDraws::new(alpha, beta, accepted as f64 / config.total_iterations as f64)?;
    draws.proposal_sd = sd;
    draws.first_iteration = config.burn_in;
    draws.thinning = config.thinning;
    Ok(draws)
}

const DISPERSION: [f64; 6] = [1.0, 0.5, 2.0, 0.75, 1.5, 0.25];

/// Runs `config.chains` chains in parallel on seed-derived streams. Chain `c`
/// starts β at a fixed multiple of the MLE (the prior mean of β when the MLE
/// does not exist).
pub fn run_chains(lik: &DgosLikelihood, priors: &GammaPriors, config: &McmcConfig) -> Result<Vec<PosteriorDraws>> {
    config.validate()?;
    let centre = match mle::fit(lik, &MleOptions::default()) {
        Ok(fit) => fit.params.beta(),
        Err(_) => priors.a2 / priors.b2,
    };
    (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(config.seed, &[c as u64]);
            run_chain(&mut r, lik, priors, config, centre * DISPERSION[c % DISPERSION.len()])
        })
        .collect()
}

/// Sample-based Bayes estimate under `loss`.
pub fn mcmc_estimate(draws: &PosteriorDraws, loss: &LossSpec, target: &Target) -> Result<f64> {
    sample_estimate(&draws.target_values(target), loss)
}

/// Bayes estimate from posterior draws of the target itself.
pub fn sample_estimate(values: &[f64], loss: &LossSpec) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("no draws".into()));
    }
    let n = values.len() as f64;
    let c = loss.c();
    let est = match loss.kind() {
        LossKind::Squared => values.iter().sum::<f64>() / n,
        LossKind::Linex => {
            let m = values.iter().map(|v| -c * v).fold(f64::NEG_INFINITY, f64::max);
            let mean = values.iter().map(|v| (-c * v - m).exp()).sum::<f64>() / n;
            -(m + mean.ln()) / c
        }
        LossKind::GeneralEntropy => {
            let mean = values.iter().map(|v| v.max(1e-300).powf(-c)).sum::<f64>() / n;
            mean.powf(-1.0 / c)
        }
    };
    if !est.is_finite() {
        return Err(Error::ApproximationOutOfRange(format!("{} estimate is {est}", loss.kind().label())));
    }
    Ok(est)
}

/// Potential scale reduction factor `sqrt((L − 1)/L + B/(L W))` for chains of
/// equal length `L`.
pub fn gelman_rubin(chains: &[&[f64]]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::InvalidParameter("at least two chains are required".into()));
    }
    let len = chains[0].len();
    if len < 10 || chains.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidParameter("chains must have equal length of at least 10".into()));
    }
    let l = len as f64;
    let j = chains.len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / l).collect();
    let grand = means.iter().sum::<f64>() / j;
    let b = l / (j - 1.0) * means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (l - 1.0))
        .sum::<f64>()
        / j;
    if w == 0.0 {
        return Ok(if b == 0.0 { ((l - 1.0) / l).sqrt() } else { f64::INFINITY });
    }
    Ok(((l - 1.0) / l + b / (l * w)).sqrt())
}

/// Writes chains as CSV with columns `chain,iteration,alpha,beta`.
pub fn write_chains_csv<W: Write>(writer: W, chains: &[PosteriorDraws]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["chain", "iteration", "alpha", "beta"])?;
    for (c, d) in chains.iter().enumerate() {
        for i in 0..d.len() {
            w.write_record([
                c.to_string(),
                d.iteration(i).to_string(),
                format!("{}", d.alpha[i]),
                format!("{}", d.beta[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
