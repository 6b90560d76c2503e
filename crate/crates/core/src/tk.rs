//! Tierney–Kadane approximation of posterior expectations.
//!
//! With `ψ = (ℓ + ln π)/n` and `ψ* = ψ + ln ζ / n`,
//!
//! ```text
//! E[ζ | x] ≈ sqrt(det Σ* / det Σ) · exp{n [ψ*(θ̂*) − ψ(θ̂)]}
//! ```
//!
//! where θ̂, θ̂* maximize ψ, ψ* and Σ, Σ* are the inverses of the negated
//! Hessians at those maxima. Internally the objectives are handled as `nψ`.

use std::cmp::Ordering;

use crate::dgos::{DgosLikelihood, DgosSample, DgosScheme};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::mle::{self, MleOptions};
use crate::prior::GammaPriors;
use crate::roots;
use crate::target::{Jet, Target};
use crate::uw::UwParams;

#[derive(Debug, Clone, Copy)]
pub struct TkOptions {
    /// Tolerance on the gradient norm of ψ (per-observation scale).
    pub tol: f64,
    pub max_iter: usize,
    /// Keep the α-prior terms in ψ. Turning this off drops `(a1 − 1) ln α − b1 α`
    /// from the objective, which reproduces the flat-prior α-equation some
    /// derivations use.
    pub alpha_prior: bool,
    pub mle: MleOptions,
}

impl Default for TkOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, alpha_prior: true, mle: MleOptions::default() }
    }
}

/// `nψ*(α, β) = ℓ + ln π + ln ζ`, with value, gradient and Hessian.
struct Objective<'a> {
    lik: &'a DgosLikelihood,
    priors: &'a GammaPriors,
    alpha_prior: bool,
    log_zeta: Option<&'a dyn Fn(&UwParams) -> Jet>,
}

impl Objective<'_> {
    fn prior_terms(&self) -> (f64, f64) {
        if self.alpha_prior {
            (self.priors.a1, self.priors.b1)
        } else {
            (1.0, 0.0)
        }
    }

    fn value(&self, p: &UwParams) -> f64 {
        let (a1, b1) = self.prior_terms();
        let pr = &self.priors;
        let (a, b) = (p.alpha(), p.beta());
        let mut v = self.lik.log_likelihood(p) + (a1 - 1.0) * a.ln() - b1 * a
            + (pr.a2 - 1.0) * b.ln()
            - pr.b2 * b;
        if let Some(g) = self.log_zeta {
            v += g(p).value;
        }
        v
    }

    fn derivatives(&self, p: &UwParams) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let (a1, b1) = self.prior_terms();
        let pr = &self.priors;
        let (a, b) = (p.alpha(), p.beta());
        let n = self.lik.n() as f64;
        let sums = self.lik.shape_sums(b);
        let mut grad = [
            (n + a1 - 1.0) / a - b1 - sums.s(),
            (n + pr.a2 - 1.0) / b - pr.b2 + self.lik.sum_ln_y() - a * sums.s1(),
        ];
        let h12 = -sums.s1();
        let mut hess = [
            [-(n + a1 - 1.0) / (a * a), h12],
            [h12, -(n + pr.a2 - 1.0) / (b * b) - a * sums.s2()],
        ];
        let mut value = self.value(p);
        if let Some(g) = self.log_zeta {
            let jet = g(p);
            for i in 0..2 {
                grad[i] += jet.grad[i];
                for (h, jh) in hess[i].iter_mut().zip(jet.hess[i]) {
                    *h += jh;
                }
            }
            if !jet.value.is_finite() {
                value = f64::NEG_INFINITY;
            }
        }
        (value, grad, hess)
    }

    /// Maximizer along one coordinate with the other held fixed.
    fn coordinate_step(&self, p: &UwParams, coord: usize) -> Option<UwParams> {
        let with = |v: f64| {
            if coord == 0 {
                UwParams::new(v, p.beta()).ok()
            } else {
                UwParams::new(p.alpha(), v).ok()
            }
        };
        let slope = |v: f64| with(v).map_or(f64::NAN, |q| self.derivatives(&q).1[coord]);
        let x0 = if coord == 0 { p.alpha() } else { p.beta() };
        let (mut lo, mut hi) = (x0, x0);
        let mut tries = 0;
        while slope(lo).partial_cmp(&0.0) != Some(Ordering::Greater) {
            lo *= 0.5;
            tries += 1;
            if tries > 200 || lo < 1e-300 {
                return None;
            }
        }
        tries = 0;
        while slope(hi).partial_cmp(&0.0) != Some(Ordering::Less) {
            hi *= 2.0;
            tries += 1;
            if tries > 200 || !hi.is_finite() {
                return None;
            }
        }
        if lo == hi {
            return with(lo);
        }
        let root = roots::bracketed(slope, lo, hi, 1e-13, 400).ok()?;
        with(root.x)
    }
}

fn newton_point(x: &UwParams, g: &[f64; 2], h: &[[f64; 2]; 2]) -> Option<UwParams> {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let d = [(h[1][1] * g[0] - h[0][1] * g[1]) / det, (h[0][0] * g[1] - h[1][0] * g[0]) / det];
    UwParams::new(x.alpha() - d[0], x.beta() - d[1]).ok()
}

fn negative_definite(h: &[[f64; 2]; 2]) -> bool {
    h[0][0] < 0.0 && h[0][0] * h[1][1] - h[0][1] * h[1][0] > 0.0
}

/// A maximum of ψ or ψ*: location, value and Hessian, all on the ψ scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiMaximum {
    pub argmax: UwParams,
    pub value: f64,
    pub hessian: [[f64; 2]; 2],
    pub iterations: usize,
}

impl PsiMaximum {
    /// det Σ, with Σ the inverse of the negated Hessian.
    pub fn det_sigma(&self) -> f64 {
        let h = &self.hessian;
        1.0 / (h[0][0] * h[1][1] - h[0][1] * h[1][0])
    }
}

/// ψ(α, β) = (ℓ + ln π)/n, dropping the gamma normalizing constants.
pub fn psi(lik: &DgosLikelihood, priors: &GammaPriors, p: &UwParams) -> f64 {
    let obj = Objective { lik, priors, alpha_prior: true, log_zeta: None };
    obj.value(p) / lik.n() as f64
}

/// Gradient of ψ.
pub fn psi_gradient(lik: &DgosLikelihood, priors: &GammaPriors, p: &UwParams) -> [f64; 2] {
    let obj = Objective { lik, priors, alpha_prior: true, log_zeta: None };
    let n = lik.n() as f64;
    let g = obj.derivatives(p).1;
    [g[0] / n, g[1] / n]
}

/// Analytic Hessian of ψ + (ln ζ)/n, the latter omitted when `log_zeta` is `None`.
pub fn psi_hessian(
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    log_zeta: Option<&dyn Fn(&UwParams) -> Jet>,
    p: &UwParams,
) -> [[f64; 2]; 2] {
    let obj = Objective { lik, priors, alpha_prior: true, log_zeta };
    let n = lik.n() as f64;
    let h = obj.derivatives(p).2;
    [[h[0][0] / n, h[0][1] / n], [h[1][0] / n, h[1][1] / n]]
}

/// α maximizing ψ for fixed β: the mode of the gamma kernel in α,
/// `(n + a1 − 1)/(b1 + S(β))`.
pub fn alpha_mode(lik: &DgosLikelihood, priors: &GammaPriors, beta: f64) -> f64 {
    (lik.n() as f64 + priors.a1 - 1.0) / (priors.b1 + lik.s(beta))
}

/// Maximizes ψ (or ψ* when `log_zeta` is given) by Newton's method with a
/// backtracking line search, switching to a coordinate-ascent sweep whenever
/// the Newton step is unusable.
pub fn maximize_psi(
    lik: &DgosLikelihood,
    priors: &GammaPriors,
    log_zeta: Option<&dyn Fn(&UwParams) -> Jet>,
    start: &UwParams,
    options: &TkOptions,
) -> Result<PsiMaximum> {
    let obj = Objective { lik, priors, alpha_prior: options.alpha_prior, log_zeta };
    let n = lik.n() as f64;
    let mut x = *start;
    let (mut f, mut g, mut h) = obj.derivatives(&x);
    if !f.is_finite() {
        return Err(Error::NoConvergence { iterations: 0, reason: "objective is not finite at the start".into() });
    }
    for it in 0..options.max_iter {
        if g[0].hypot(g[1]) / n < options.tol {
            if !negative_definite(&h) {
                return Err(Error::NonConcaveAtOptimum);
            }
            // Polish with full Newton steps while the gradient keeps shrinking:
            // the determinant ratio is sensitive to where each maximum is taken.
            for _ in 0..5 {
                let Some(cand) = newton_point(&x, &g, &h) else { break };
                let (fc, gc, hc) = obj.derivatives(&cand);
                if !(fc.is_finite() && gc[0].hypot(gc[1]) < g[0].hypot(g[1]) && negative_definite(&hc)) {
                    break;
                }
                (x, f, g, h) = (cand, fc, gc, hc);
            }
            return Ok(PsiMaximum {
                argmax: x,
                value: f / n,
                hessian: [[h[0][0] / n, h[0][1] / n], [h[1][0] / n, h[1][1] / n]],
                iterations: it,
            });
        }
        let mut next = None;
        if negative_definite(&h) {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            let d = [
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
            ];
            if x.alpha() + d[0] > 0.0 && x.beta() + d[1] > 0.0 {
                let mut s = 1.0;
                for _ in 0..60 {
                    if let Ok(cand) = UwParams::new(x.alpha() + s * d[0], x.beta() + s * d[1]) {
                        let fc = obj.value(&cand);
                        if fc.is_finite() && fc >= f - 1e-12 * f.abs().max(1.0) {
                            next = Some(cand);
                            break;
                        }
                    }
                    s *= 0.5;
                }
            }
        }
        let cand = match next {
            Some(c) => c,
            None => obj
                .coordinate_step(&x, 0)
                .and_then(|c| obj.coordinate_step(&c, 1))
                .ok_or_else(|| Error::NoConvergence {
                    iterations: it,
                    reason: "coordinate ascent could not bracket a maximum".into(),
                })?,
        };
        x = cand;
        (f, g, h) = obj.derivatives(&x);
        if !f.is_finite() {
            return Err(Error::NoConvergence { iterations: it, reason: "objective left its domain".into() });
        }
    }
    Err(Error::NoConvergence {
        iterations: options.max_iter,
        reason: format!("gradient norm {} above tolerance", g[0].hypot(g[1]) / n),
    })
}

/// Both maxima entering one T-K ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkWorkspace {
    pub psi_hat: PsiMaximum,
    pub psi_star_hat: PsiMaximum,
    pub det_sigma: f64,
    pub det_sigma_star: f64,
    n_obs: f64,
}

impl TkWorkspace {
    /// The approximated E[ζ | x].
    pub fn expectation(&self) -> f64 {
        let n_gap = (self.psi_star_hat.value - self.psi_hat.value) * self.n();
        (self.det_sigma_star / self.det_sigma).sqrt() * n_gap.exp()
    }

    fn n(&self) -> f64 {
        self.n_obs
    }
}

/// T-K estimator for one sample; the maximum of ψ is shared by every
/// (loss, target) pair.
#[derive(Debug, Clone)]
pub struct TkEstimator<'a> {
    lik: &'a DgosLikelihood,
    priors: GammaPriors,
    options: TkOptions,
    base: PsiMaximum,
}

impl<'a> TkEstimator<'a> {
    /// Maximizes ψ starting from the MLE, or from the α-mode at β = 1 when the
    /// MLE does not exist.
    pub fn new(lik: &'a DgosLikelihood, priors: &GammaPriors, options: &TkOptions) -> Result<Self> {
        let start = match mle::fit(lik, &options.mle) {
            Ok(fit) => fit.params,
            Err(_) => UwParams::new(alpha_mode(lik, priors, 1.0).max(1e-3), 1.0)?,
        };
        let base = maximize_psi(lik, priors, None, &start, options)?;
        Ok(Self { lik, priors: *priors, options: *options, base })
    }

    pub fn psi_maximum(&self) -> &PsiMaximum {
        &self.base
    }

    /// T-K ratio for an arbitrary `ln ζ`.
    pub fn workspace(&self, log_zeta: &dyn Fn(&UwParams) -> Jet) -> Result<TkWorkspace> {
        let star = maximize_psi(self.lik, &self.priors, Some(log_zeta), &self.base.argmax, &self.options)?;
        let (det_sigma, det_sigma_star) = (self.base.det_sigma(), star.det_sigma());
        if !(det_sigma > 0.0 && det_sigma_star > 0.0 && det_sigma.is_finite() && det_sigma_star.is_finite()) {
            return Err(Error::NonConcaveAtOptimum);
        }
        Ok(TkWorkspace {
            psi_hat: self.base,
            psi_star_hat: star,
            det_sigma,
            det_sigma_star,
            n_obs: self.lik.n() as f64,
        })
    }

    pub fn estimate(&self, loss: &LossSpec, target: &Target) -> Result<f64> {
        let log_zeta = |p: &UwParams| loss.log_zeta(&target.jet(p));
        let inner = self.workspace(&log_zeta)?.expectation();
        loss.finalize(inner)
    }
}

pub fn tk_estimate(
    sample: &DgosSample,
    scheme: &DgosScheme,
    priors: &GammaPriors,
    loss: &LossSpec,
    target: &Target,
) -> Result<f64> {
    let lik = DgosLikelihood::new(sample, scheme)?;
    TkEstimator::new(&lik, priors, &TkOptions::default())?.estimate(loss, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uw::ReliabilityQuery;
    use approx::assert_relative_eq;

    const FIXED: [f64; 6] = [0.93, 0.81, 0.62, 0.47, 0.22, 0.05];

    fn setup() -> (DgosLikelihood, GammaPriors) {
        let sample = DgosSample::new(FIXED.to_vec()).unwrap();
        let scheme = DgosScheme::order_statistics(6).unwrap();
        (DgosLikelihood::new(&sample, &scheme).unwrap(), GammaPriors::prior_one())
    }

    fn fd_hessian(f: &dyn Fn(f64, f64) -> f64, a: f64, b: f64) -> [[f64; 2]; 2] {
        let h = 1e-4;
        let haa = (f(a + h, b) - 2.0 * f(a, b) + f(a - h, b)) / (h * h);
        let hbb = (f(a, b + h) - 2.0 * f(a, b) + f(a, b - h)) / (h * h);
        let hab = (f(a + h, b + h) - f(a + h, b - h) - f(a - h, b + h) + f(a - h, b - h)) / (4.0 * h * h);
        [[haa, hab], [hab, hbb]]
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let (lik, pr) = setup();
        let loss = LossSpec::linex(0.5).unwrap();
        let target = Target::Reliability(ReliabilityQuery::new(0.5).unwrap());
        let lz = |p: &UwParams| loss.log_zeta(&target.jet(p));
        let n = lik.n() as f64;
        for &(a, b) in &[(0.6, 0.9), (1.3, 1.7), (2.2, 0.7)] {
            let p = UwParams::new(a, b).unwrap();
            let plain = |a: f64, b: f64| psi(&lik, &pr, &UwParams::new(a, b).unwrap());
            let star = |a: f64, b: f64| {
                let q = UwParams::new(a, b).unwrap();
                psi(&lik, &pr, &q) + lz(&q).value / n
            };
            for (analytic, f) in [
                (psi_hessian(&lik, &pr, None, &p), &plain as &dyn Fn(f64, f64) -> f64),
                (psi_hessian(&lik, &pr, Some(&lz), &p), &star),
            ] {
                let fd = fd_hessian(f, a, b);
                for i in 0..2 {
                    for j in 0..2 {
                        assert_relative_eq!(analytic[i][j], fd[i][j], max_relative = 1e-5, epsilon = 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_step_is_gamma_mode() {
        let (lik, pr) = setup();
        for &b in &[0.5, 1.0, 2.5] {
            let a = alpha_mode(&lik, &pr, b);
            let g = psi_gradient(&lik, &pr, &UwParams::new(a, b).unwrap());
            assert!(g[0].abs() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn maximum_has_zero_gradient() {
        let (lik, pr) = setup();
        let opts = TkOptions::default();
        let m = maximize_psi(&lik, &pr, None, &UwParams::new(3.0, 0.2).unwrap(), &opts).unwrap();
        let g = psi_gradient(&lik, &pr, &m.argmax);
        assert!(g[0].hypot(g[1]) < 1e-8);
        assert!(m.det_sigma() > 0.0);
        // same maximum with a constant added to the objective
        let shifted = |_: &UwParams| Jet::constant(7.5);
        let s = maximize_psi(&lik, &pr, Some(&shifted), &m.argmax, &opts).unwrap();
        assert_eq!(s.argmax, m.argmax);
    }

    #[test]
    fn gradient_matches_beta_score_equation() {
        let (lik, pr) = setup();
        let p = UwParams::new(0.9, 1.4).unwrap();
        let n = lik.n() as f64;
        let s1 = lik.shape_sums(1.4).s1();
        let expected = (n / 1.4 + lik.sum_ln_y() - 0.9 * s1 + (pr.a2 - 1.0) / 1.4 - pr.b2) / n;
        assert_relative_eq!(psi_gradient(&lik, &pr, &p)[1], expected, max_relative = 1e-14);
    }

    #[test]
    fn unit_field_is_exactly_one() {
        let (lik, pr) = setup();
        let tk = TkEstimator::new(&lik, &pr, &TkOptions::default()).unwrap();
        let ws = tk.workspace(&|_: &UwParams| Jet::constant(0.0)).unwrap();
        assert_eq!(ws.expectation(), 1.0);
    }

    #[test]
    fn general_entropy_minus_one_is_self() {
        let (lik, pr) = setup();
        let tk = TkEstimator::new(&lik, &pr, &TkOptions::default()).unwrap();
        let t = ReliabilityQuery::new(0.5).unwrap();
        for target in Target::standard_set(t) {
            let s = tk.estimate(&LossSpec::squared(), &target).unwrap();
            let ge = tk.estimate(&LossSpec::general_entropy(-1.0).unwrap(), &target).unwrap();
            assert!((s - ge).abs() < 1e-6, "{target}: {s} vs {ge}");
        }
    }

    #[test]
    fn linex_small_c_limit() {
        use rand::SeedableRng;
        // the c -> 0 limit is stable, and approaches SELF as n grows (the two
        // approximations differ at second order)
        let scheme = DgosScheme::order_statistics(60).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(60);
        let sample = crate::dgos::sample_dgos(&mut rng, &scheme, &UwParams::new(1.0, 1.0).unwrap());
        let lik = DgosLikelihood::new(&sample, &scheme).unwrap();
        let tk = TkEstimator::new(&lik, &GammaPriors::prior_one(), &TkOptions::default()).unwrap();
        let t = ReliabilityQuery::new(0.5).unwrap();
        for target in Target::standard_set(t) {
            let s = tk.estimate(&LossSpec::squared(), &target).unwrap();
            let l5 = tk.estimate(&LossSpec::linex(1e-5).unwrap(), &target).unwrap();
            let l7 = tk.estimate(&LossSpec::linex(1e-7).unwrap(), &target).unwrap();
            assert!((l5 - l7).abs() < 1e-5, "{target}: {l5} vs {l7}");
            assert!((s - l5).abs() < 1e-3, "{target}: {s} vs {l5}");
        }
    }

    #[test]
    fn literal_alpha_equation_changes_the_mode() {
        let (lik, pr) = setup();
        let with = TkEstimator::new(&lik, &pr, &TkOptions::default()).unwrap();
        let opts = TkOptions { alpha_prior: false, ..TkOptions::default() };
        let without = TkEstimator::new(&lik, &pr, &opts).unwrap();
        let a = with.psi_maximum().argmax.alpha();
        let b = without.psi_maximum().argmax.alpha();
        assert!(a != b);
        let beta = without.psi_maximum().argmax.beta();
        assert_relative_eq!(b, lik.n() as f64 / lik.s(beta), max_relative = 1e-7);
    }
}
