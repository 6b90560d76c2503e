//! Lindley's second-order approximation of posterior expectations.
//!
//! All log-likelihood derivatives are evaluated at the maximum-likelihood
//! estimate. For a function ζ(α, β) with gradient ζ_i and Hessian ζ_ij,
//!
//! ```text
//! E[ζ | x] ≈ ζ + ½ Σ ζ_ij τ_ij + Σ φ_i P_i
//!              + ½ (L111 τ11 P1 + L222 τ22 P2)
//!              + ½ [L112 (2 τ12 P1 + τ11 P2) + L122 (τ22 P1 + 2 τ12 P2)]
//! ```
//!
//! with `τ = [−L_ij]⁻¹`, `P_r = Σ_j ζ_j τ_rj` and φ the log-prior gradient.

use crate::dgos::{DgosLikelihood, DgosSample, DgosScheme};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::mle::{self, MleOptions, MleResult};
use crate::prior::GammaPriors;
use crate::target::{Jet, Target};
use crate::uw::UwParams;

/// Log-likelihood derivatives, their inverse information matrix and the
/// log-prior gradient at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindleyWorkspace {
    pub at: UwParams,
    pub l11: f64,
    pub l22: f64,
    pub l12: f64,
    pub l111: f64,
    pub l222: f64,
    pub l112: f64,
    pub l122: f64,
    pub tau: [[f64; 2]; 2],
    pub phi1: f64,
    pub phi2: f64,
}

pub fn lindley_derivatives(
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    at: &UwParams,
) -> Result<LindleyWorkspace> {
    let (a, b) = (at.alpha(), at.beta());
    let n = lik.n() as f64;
    let sums = lik.shape_sums(b);
    let (s1, s2, s3) = (sums.s1(), sums.s2(), sums.s3());
    let l11 = -n / (a * a);
    let l12 = -s1;
    let l22 = -n / (b * b) - a * s2;
    let l111 = 2.0 * n / (a * a * a);
    let l222 = 2.0 * n / (b * b * b) - a * s3;
    let l122 = -s2;

    // τ = inverse of [−L_ij]
    let det = l11 * l22 - l12 * l12;
    if !(det > 0.0 && det.is_finite()) || l11 >= 0.0 {
        return Err(Error::NonConcaveAtOptimum);
    }
    let tau = [[-l22 / det, l12 / det], [l12 / det, -l11 / det]];
    let (phi1, phi2) = priors.gradient(at);
    Ok(LindleyWorkspace {
        at: *at,
        l11,
        l22,
        l12,
        l111,
        l222,
        l112: 0.0,
        l122,
        tau,
        phi1,
        phi2,
    })
}

/// Approximates E[ζ | x] from ζ's jet at the workspace point.
pub fn lindley_expectation(ws: &LindleyWorkspace, zeta: &Jet) -> f64 {
    let t = &ws.tau;
    let g = zeta.grad;
    let p1 = g[0] * t[0][0] + g[1] * t[0][1];
    let p2 = g[0] * t[1][0] + g[1] * t[1][1];
    let curvature: f64 = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| zeta.hess[i][j] * t[i][j])
        .sum();
    zeta.value
        + 0.5 * curvature
        + ws.phi1 * p1
        + ws.phi2 * p2
        + 0.5 * (ws.l111 * t[0][0] * p1 + ws.l222 * t[1][1] * p2)
        + 0.5
            * (ws.l112 * (2.0 * t[0][1] * p1 + t[0][0] * p2)
                + ws.l122 * (t[1][1] * p1 + 2.0 * t[0][1] * p2))
}

/// Lindley Bayes estimator for one sample: the MLE and workspace are computed
/// once and reused for every (loss, target) pair.
#[derive(Debug, Clone)]
pub struct LindleyEstimator {
    mle: MleResult,
    ws: LindleyWorkspace,
}

impl LindleyEstimator {
    pub fn new(lik: &DgosLikelihood, priors: &GammaPriors, options: &MleOptions) -> Result<Self> {
        let mle = mle::fit(lik, options)?;
        let ws = lindley_derivatives(lik, priors, &mle.params)?;
        Ok(Self { mle, ws })
    }

    pub fn mle(&self) -> &MleResult {
        &self.mle
    }

    pub fn workspace(&self) -> &LindleyWorkspace {
        &self.ws
    }

    pub fn estimate(&self, loss: &LossSpec, target: &Target) -> Result<f64> {
        let theta = target.jet(&self.ws.at);
        let inner = lindley_expectation(&self.ws, &loss.zeta(&theta));
        let est = loss.finalize(inner)?;
        if !target.admits(est) {
            return Err(Error::ApproximationOutOfRange(format!(
                "{target} estimate {est} is outside the parameter range"
            )));
        }
        Ok(est)
    }
}

pub fn lindley_estimate(
    sample: &DgosSample,
    scheme: &DgosScheme,
    priors: &GammaPriors,
    loss: &LossSpec,
    target: &Target,
) -> Result<f64> {
    let lik = DgosLikelihood::new(sample, scheme)?;
    LindleyEstimator::new(&lik, priors, &MleOptions::default())?.estimate(loss, target)
}
