//! Test oracles that do not go through the library's likelihood code.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uwbayes::{sample_dgos, DgosSample, DgosScheme, GammaPriors, UwParams};

/// Log joint posterior kernel evaluated straight from the definitions:
/// likelihood weights (m_i + 1) for i < n and k for the last value.
pub struct Kernel {
    ln_y: Vec<f64>,
    weights: Vec<f64>,
    n: f64,
    sum_ln_y: f64,
    priors: GammaPriors,
}

impl Kernel {
    pub fn new(sample: &DgosSample, scheme: &DgosScheme, priors: GammaPriors) -> Self {
        let n = sample.len();
        let ln_y: Vec<f64> = sample.values().iter().map(|x| (-x.ln()).ln()).collect();
        let mut weights: Vec<f64> = scheme.m().iter().map(|m| m + 1.0).collect();
        weights.push(scheme.k());
        Self { sum_ln_y: ln_y.iter().sum(), ln_y, weights, n: n as f64, priors }
    }

    pub fn log_post(&self, a: f64, b: f64) -> f64 {
        let s: f64 = self.weights.iter().zip(&self.ln_y).map(|(w, l)| w * (b * l).exp()).sum();
        let p = &self.priors;
        self.n * (a.ln() + b.ln()) + (b - 1.0) * self.sum_ln_y - a * s + (p.a1 - 1.0) * a.ln() - p.b1 * a
            + (p.a2 - 1.0) * b.ln()
            - p.b2 * b
    }
}

/// Trapezoid rule on an m×m grid over a box bracketed until the log
/// posterior on every edge is at least `drop` below its maximum.
pub struct Quadrature {
    nodes: Vec<(f64, f64, f64)>,
}

impl Quadrature {
    pub fn new(kernel: &Kernel, m: usize, drop: f64) -> Self {
        // coarse log-grid search for the mode
        let mut best = (f64::NEG_INFINITY, 1.0, 1.0);
        for i in 0..=240 {
            let a = 10f64.powf(-6.0 + 9.0 * i as f64 / 240.0);
            for j in 0..=240 {
                let b = 10f64.powf(-2.0 + 4.0 * j as f64 / 240.0);
                let v = kernel.log_post(a, b);
                if v > best.0 {
                    best = (v, a, b);
                }
            }
        }
        let (top, am, bm) = best;
        let (mut a0, mut a1, mut b0, mut b1) = (am * 0.8, am * 1.25, bm * 0.8, bm * 1.25);
        let edge_max = |a0: f64, a1: f64, b0: f64, b1: f64, side: usize| {
            (0..=400)
                .map(|k| {
                    let u = k as f64 / 400.0;
                    match side {
                        0 => kernel.log_post(a0, b0 + u * (b1 - b0)),
                        1 => kernel.log_post(a1, b0 + u * (b1 - b0)),
                        2 => kernel.log_post(a0 + u * (a1 - a0), b0),
                        _ => kernel.log_post(a0 + u * (a1 - a0), b1),
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        for _ in 0..200 {
            let mut grown = false;
            if edge_max(a0, a1, b0, b1, 0) > top - drop {
                a0 *= 0.7;
                grown = true;
            }
            if edge_max(a0, a1, b0, b1, 1) > top - drop {
                a1 *= 1.3;
                grown = true;
            }
            if edge_max(a0, a1, b0, b1, 2) > top - drop {
                b0 *= 0.7;
                grown = true;
            }
            if edge_max(a0, a1, b0, b1, 3) > top - drop {
                b1 *= 1.3;
                grown = true;
            }
            if !grown {
                break;
            }
        }
        let (ha, hb) = ((a1 - a0) / m as f64, (b1 - b0) / m as f64);
        let mut nodes = Vec::with_capacity((m + 1) * (m + 1));
        let mut peak = f64::NEG_INFINITY;
        for i in 0..=m {
            for j in 0..=m {
                let (a, b) = (a0 + i as f64 * ha, b0 + j as f64 * hb);
                let w: f64 = if i == 0 || i == m { 0.5 } else { 1.0 } * if j == 0 || j == m { 0.5 } else { 1.0 };
                let lp = kernel.log_post(a, b);
                peak = peak.max(lp);
                nodes.push((a, b, w.ln() + lp));
            }
        }
        let mut total = 0.0;
        for n in nodes.iter_mut() {
            n.2 = (n.2 - peak).exp();
            total += n.2;
        }
        for n in nodes.iter_mut() {
            n.2 /= total;
        }
        Self { nodes }
    }

    pub fn mean(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(a, b, w)| w * f(a, b)).sum()
    }
}

pub fn posterior_means(sample: &DgosSample, scheme: &DgosScheme, priors: GammaPriors) -> (f64, f64) {
    let q = Quadrature::new(&Kernel::new(sample, scheme, priors), 800, 25.0);
    (q.mean(|a, _| a), q.mean(|_, b| b))
}

/// Simulated n = 15 datasets from UW(1, 1): `count` order-statistics samples
/// followed by `count` lower-record samples.
pub fn simulated_datasets(count: usize) -> Vec<(DgosSample, DgosScheme)> {
    let truth = UwParams::new(1.0, 1.0).unwrap();
    let mut out = Vec::new();
    for (tag, scheme) in [DgosScheme::order_statistics(15).unwrap(), DgosScheme::lower_records(15).unwrap()]
        .into_iter()
        .enumerate()
    {
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * tag as u64 + i as u64 + 17);
            out.push((sample_dgos(&mut rng, &scheme, &truth), scheme.clone()));
        }
    }
    out
}

/// One analytic derivative against its central-difference counterpart.
#[derive(Debug, Clone)]
pub struct Check {
    pub what: String,
    pub analytic: f64,
    pub numeric: f64,
}

impl Check {
    pub fn rel_error(&self) -> f64 {
        (self.analytic - self.numeric).abs() / self.analytic.abs().max(1.0)
    }
}

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * x.abs().max(1e-3);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn p(a: f64, b: f64) -> UwParams {
    UwParams::new(a, b).unwrap()
}

/// Every derivative used by the Lindley and T-K engines at `at`, each checked
/// against central differences of the next-lower analytic order.
pub fn derivative_checks(
    lik: &uwbayes::DgosLikelihood,
    priors: &GammaPriors,
    at: &UwParams,
    t: uwbayes::ReliabilityQuery,
) -> Vec<Check> {
    use uwbayes::lindley::lindley_derivatives;
    use uwbayes::tk::{psi, psi_gradient, psi_hessian};
    use uwbayes::{LossSpec, Target};

    let (a, b) = (at.alpha(), at.beta());
    let mut out = Vec::new();
    let mut push = |what: &str, analytic: f64, numeric: f64| {
        out.push(Check { what: what.to_string(), analytic, numeric });
    };

    let score = lik.score(at);
    push("l_a", score.0, central(|x| lik.log_likelihood(&p(x, b)), a));
    push("l_b", score.1, central(|x| lik.log_likelihood(&p(a, x)), b));

    let ws = lindley_derivatives(lik, priors, at).unwrap();
    push("L11", ws.l11, central(|x| lik.score(&p(x, b)).0, a));
    push("L12", ws.l12, central(|x| lik.score(&p(a, x)).0, b));
    push("L21", ws.l12, central(|x| lik.score(&p(x, b)).1, a));
    push("L22", ws.l22, central(|x| lik.score(&p(a, x)).1, b));
    let w = |a: f64, b: f64| lindley_derivatives(lik, priors, &p(a, b)).unwrap();
    push("L111", ws.l111, central(|x| w(x, b).l11, a));
    push("L112", ws.l112, central(|x| w(a, x).l11, b));
    push("L121", ws.l112, central(|x| w(x, b).l12, a));
    push("L122", ws.l122, central(|x| w(a, x).l12, b));
    push("L221", ws.l122, central(|x| w(x, b).l22, a));
    push("L222", ws.l222, central(|x| w(a, x).l22, b));
    let (g1, g2) = priors.gradient(at);
    push("phi1", ws.phi1, g1);
    push("phi2", ws.phi2, g2);

    let g = psi_gradient(lik, priors, at);
    push("psi_a", g[0], central(|x| psi(lik, priors, &p(x, b)), a));
    push("psi_b", g[1], central(|x| psi(lik, priors, &p(a, x)), b));
    let h = psi_hessian(lik, priors, None, at);
    push("psi_aa", h[0][0], central(|x| psi_gradient(lik, priors, &p(x, b))[0], a));
    push("psi_ab", h[0][1], central(|x| psi_gradient(lik, priors, &p(a, x))[0], b));
    push("psi_bb", h[1][1], central(|x| psi_gradient(lik, priors, &p(a, x))[1], b));

    let n = lik.n() as f64;
    let losses = [LossSpec::squared(), LossSpec::linex(0.5).unwrap(), LossSpec::general_entropy(0.5).unwrap()];
    for loss in losses {
        for target in Target::standard_set(t) {
            let tag = format!("{}/{}", loss.kind().label(), target.label());
            for (kind, jet_of) in [
                ("zeta", &(|q: &UwParams| loss.zeta(&target.jet(q))) as &dyn Fn(&UwParams) -> uwbayes::Jet),
                ("log_zeta", &|q: &UwParams| loss.log_zeta(&target.jet(q))),
            ] {
                let j = jet_of(at);
                push(&format!("{kind}_a {tag}"), j.grad[0], central(|x| jet_of(&p(x, b)).value, a));
                push(&format!("{kind}_b {tag}"), j.grad[1], central(|x| jet_of(&p(a, x)).value, b));
                push(&format!("{kind}_aa {tag}"), j.hess[0][0], central(|x| jet_of(&p(x, b)).grad[0], a));
                push(&format!("{kind}_ab {tag}"), j.hess[0][1], central(|x| jet_of(&p(a, x)).grad[0], b));
                push(&format!("{kind}_bb {tag}"), j.hess[1][1], central(|x| jet_of(&p(a, x)).grad[1], b));
            }
            let lz = |q: &UwParams| loss.log_zeta(&target.jet(q));
            let grad_star = |q: &UwParams| {
                let g = psi_gradient(lik, priors, q);
                let j = lz(q);
                [g[0] + j.grad[0] / n, g[1] + j.grad[1] / n]
            };
            let hs = psi_hessian(lik, priors, Some(&lz), at);
            push(&format!("psi*_aa {tag}"), hs[0][0], central(|x| grad_star(&p(x, b))[0], a));
            push(&format!("psi*_ab {tag}"), hs[0][1], central(|x| grad_star(&p(a, x))[0], b));
            push(&format!("psi*_bb {tag}"), hs[1][1], central(|x| grad_star(&p(a, x))[1], b));
        }
    }
    out
}

/// Twenty parameter points scattered around the MLE of each of a few fixed
/// datasets (order statistics, records, a general scheme).
pub fn concordance_grid() -> Vec<(uwbayes::DgosLikelihood, UwParams)> {
    use rand::Rng;
    let truth = UwParams::new(1.2, 1.4).unwrap();
    let schemes = [
        DgosScheme::order_statistics(12).unwrap(),
        DgosScheme::lower_records(8).unwrap(),
        DgosScheme::general(6, 2.0, vec![1.0, 0.5, 0.0, 2.0, 1.0]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut out = Vec::new();
    for i in 0..20 {
        let scheme = &schemes[i % schemes.len()];
        let sample = sample_dgos(&mut rng, scheme, &truth);
        let lik = uwbayes::DgosLikelihood::new(&sample, scheme).unwrap();
        let Ok(fit) = uwbayes::mle::fit(&lik, &Default::default()) else { continue };
        let m = fit.params;
        let at = UwParams::new(
            m.alpha() * rng.random_range(-0.25f64..0.25).exp(),
            m.beta() * rng.random_range(-0.25f64..0.25).exp(),
        )
        .unwrap();
        if uwbayes::lindley::lindley_derivatives(&lik, &GammaPriors::prior_one(), &at).is_ok() {
            out.push((lik, at));
        }
    }
    out
}

/// Two-sample KS statistic and asymptotic p-value `Q(√(nm/(n+m)) D)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    (d, uwbayes::special::kolmogorov_q(ne * d))
}

/// Pooled order-statistics samples against iid draws, and the first
/// coordinate's one-sample p-value against `F^γ₁`.
pub fn sampler_p_values(n: usize, reps: usize, seed: u64) -> (f64, f64) {
    let truth = UwParams::new(1.3, 0.8).unwrap();
    let scheme = DgosScheme::order_statistics(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pooled: Vec<f64> = (0..reps).flat_map(|_| sample_dgos(&mut rng, &scheme, &truth).values().to_vec()).collect();
    let iid = truth.sample_iid(&mut rng, pooled.len()).unwrap();
    let (_, p_pooled) = ks_two_sample(&pooled, &iid);

    let first: Vec<f64> = (0..5000).map(|_| sample_dgos(&mut rng, &scheme, &truth).values()[0]).collect();
    let g1 = scheme.gamma()[0];
    let ks = uwbayes::data::ks_test(&first, |x| truth.cdf(x).unwrap().powf(g1)).unwrap();
    (p_pooled, ks.p_value)
}

/// Normalized cdf of β | α from trapezoid quadrature of the MH target kernel
/// on a fine grid over (0, hi].
pub fn beta_conditional_cdf(
    lik: &uwbayes::DgosLikelihood,
    priors: &GammaPriors,
    alpha: f64,
    hi: f64,
) -> impl Fn(f64) -> f64 {
    let (lo, m) = (1e-6, 20_000);
    let h = (hi - lo) / m as f64;
    let logk: Vec<f64> = (0..=m)
        .map(|i| uwbayes::mcmc::beta_log_kernel(lik, priors, alpha, lo + i as f64 * h))
        .collect();
    let top = logk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut cum = vec![0.0; m + 1];
    for i in 1..=m {
        cum[i] = cum[i - 1] + 0.5 * h * ((logk[i] - top).exp() + (logk[i - 1] - top).exp());
    }
    let total = cum[m];
    move |b: f64| {
        if b <= lo {
            return 0.0;
        }
        if b >= hi {
            return 1.0;
        }
        let pos = (b - lo) / h;
        let i = (pos.floor() as usize).min(m - 1);
        let w = pos - i as f64;
        (cum[i] * (1.0 - w) + cum[i + 1] * w) / total
    }
}
