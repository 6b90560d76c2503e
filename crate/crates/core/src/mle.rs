//! Maximum-likelihood fit of (α, β) under a dgos scheme.
//!
//! For fixed β the α-score vanishes at `α = n / S(β)`. Substituting gives the
//! profiled β-score `g(β) = n/β + Σ ln y_i − n S'(β)/S(β)`, which is solved by a
//! bracketed search and then polished with Newton steps.

use crate::dgos::{DgosLikelihood, DgosSample, DgosScheme};
use crate::error::{Error, Result};
use crate::roots;
use crate::uw::UwParams;

#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    /// Tolerance on the Euclidean norm of the score.
    pub tol: f64,
    pub max_iter: usize,
    pub beta_bracket: (f64, f64),
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, beta_bracket: (1e-3, 1e3) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleResult {
    pub params: UwParams,
    pub converged: bool,
    pub iterations: usize,
    pub score_norm: f64,
}

/// Score vector `(∂ℓ/∂α, ∂ℓ/∂β)`.
pub fn score(sample: &DgosSample, scheme: &DgosScheme, p: &UwParams) -> Result<(f64, f64)> {
    Ok(DgosLikelihood::new(sample, scheme)?.score(p))
}

pub fn fit_mle(sample: &DgosSample, scheme: &DgosScheme, options: &MleOptions) -> Result<MleResult> {
    fit(&DgosLikelihood::new(sample, scheme)?, options)
}

fn profile_score(lik: &DgosLikelihood, beta: f64) -> f64 {
    let n = lik.n() as f64;
    n / beta + lik.sum_ln_y() - n * lik.shape_sums(beta).ratio(1)
}

fn profile_score_derivative(lik: &DgosLikelihood, beta: f64) -> f64 {
    let n = lik.n() as f64;
    let sums = lik.shape_sums(beta);
    let r1 = sums.ratio(1);
    -n / (beta * beta) - n * (sums.ratio(2) - r1 * r1)
}

pub fn fit(lik: &DgosLikelihood, options: &MleOptions) -> Result<MleResult> {
    let n = lik.n();
    if n < 2 {
        return Err(Error::DegenerateSample(
            "at least two observations are needed for a finite maximum".into(),
        ));
    }
    let ln_y = lik.ln_y();
    let spread = ln_y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ln_y.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread <= 1e-12 * ln_y.iter().map(|v| v.abs()).fold(1.0, f64::max) {
        return Err(Error::DegenerateSample("all observations coincide".into()));
    }
    let (lo, hi) = options.beta_bracket;
    if lik.shape_sums(lo).s() <= 0.0 || lik.shape_sums(hi).s() <= 0.0 {
        return Err(Error::DegenerateSample("S(beta) is not positive on the search bracket".into()));
    }
    let g_hi = profile_score(lik, hi);
    if g_hi > 0.0 {
        // n/β dominates everywhere below the bracket's top: the weighted spread
        // of ln y is too small for an interior root
        return Err(Error::DegenerateSample(format!(
            "profile score stays positive up to beta = {hi}"
        )));
    }
    let root = roots::bracketed(|b| profile_score(lik, b), lo, hi, options.tol * 1e-3, options.max_iter)?;
    let mut beta = root.x;
    let mut iterations = root.iterations;
    // Newton polish; the profile score is decreasing so steps stay local
    for _ in 0..5 {
        let g = profile_score(lik, beta);
        let dg = profile_score_derivative(lik, beta);
        if g == 0.0 || dg >= 0.0 || !dg.is_finite() {
            break;
        }
        let next = beta - g / dg;
        if !(next > lo && next < hi) {
            break;
        }
        iterations += 1;
        if profile_score(lik, next).abs() > g.abs() {
            break;
        }
        beta = next;
    }
    let alpha = n as f64 / lik.shape_sums(beta).s();
    let params = UwParams::new(alpha, beta)?;
    let (sa, sb) = lik.score(&params);
    let score_norm = sa.hypot(sb);
    if !score_norm.is_finite() {
        return Err(Error::NoConvergence { iterations, reason: "non-finite score at the root".into() });
    }
    Ok(MleResult { params, converged: score_norm < options.tol, iterations, score_norm })
}
