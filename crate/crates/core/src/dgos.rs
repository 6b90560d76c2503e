//! Dual generalized order statistics (dgos) from a Unit-Weibull parent.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::Open01;

use crate::error::{Error, Result};
use crate::uw::{clamp_open_unit, UwParams};

/// Model configuration `(n, k, m̃)` together with the derived weights
/// `γ_r = k + n - r + M_r`, `M_r = Σ_{j=r}^{n-1} m_j`, `γ_n = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgosScheme {
    n: usize,
    k: f64,
    m: Vec<f64>,
    gamma: Vec<f64>,
}

impl DgosScheme {
    /// Reversed order statistics: `m_i = 0`, `k = 1`.
    pub fn order_statistics(n: usize) -> Result<Self> {
        Self::general(n, 1.0, vec![0.0; n.saturating_sub(1)])
    }

    /// Ordinary lower record values: `m_i = -1`, `k = 1`.
    pub fn lower_records(n: usize) -> Result<Self> {
        Self::general(n, 1.0, vec![-1.0; n.saturating_sub(1)])
    }

    pub fn general(n: usize, k: f64, m: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidScheme("n must be at least 1".into()));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidScheme(format!("k must be positive, got {k}")));
        }
        if m.len() != n - 1 {
            return Err(Error::InvalidScheme(format!(
                "expected {} values of m for n = {n}, got {}",
                n - 1,
                m.len()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidScheme("m must be finite".into()));
        }
        let mut gamma = vec![0.0; n];
        gamma[n - 1] = k;
        let mut tail = 0.0;
        for r in (1..n).rev() {
            tail += m[r - 1];
            gamma[r - 1] = k + (n - r) as f64 + tail;
        }
        if let Some((r, g)) = gamma.iter().enumerate().find(|(_, &g)| g <= 0.0) {
            return Err(Error::InvalidScheme(format!("gamma_{} = {g} is not positive", r + 1)));
        }
        Ok(Self { n, k, m, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Weights multiplying `(-ln x_i)^β` in the likelihood exponent:
    /// `m_i + 1` for `i < n` and `k` for the last observation.
    pub fn weights(&self) -> Vec<f64> {
        self.m.iter().map(|m| m + 1.0).chain(std::iter::once(self.k)).collect()
    }

    /// Non-fatal notice for `k < 1`, which the usual record models exclude.
    pub fn warning(&self) -> Option<String> {
        (self.k < 1.0).then(|| format!("k = {} is below 1; accepted since all gamma_r > 0", self.k))
    }
}

/// An observed dgos sample `1 > x_1 ≥ x_2 ≥ … ≥ x_n > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgosSample {
    values: Vec<f64>,
}

impl DgosSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("sample is empty".into()));
        }
        if let Some(&x) = values.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::domain("x", x, "(0, 1)"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("sample values must be non-increasing".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reads a one-column CSV with header `x`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 1 || &headers[0] != "x" {
            return Err(Error::Config(format!("expected a single `x` column, found {headers:?}")));
        }
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v: f64 = rec[0]
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse `{}` as a number", &rec[0])))?;
            values.push(v);
        }
        Self::new(values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["x"])?;
        for v in &self.values {
            wtr.write_record([v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Draws one dgos sample of size `scheme.n()` from UW(α, β).
///
/// Uses the product representation: with independent uniforms `U_i`,
/// `V_i = U_i^(1/γ_i)` and `W_i = V_1 ⋯ V_i`, the values `F⁻¹(W_i)` are
/// jointly distributed as dgos. Products are accumulated in log space.
pub fn sample_dgos<R: Rng + ?Sized>(rng: &mut R, scheme: &DgosScheme, p: &UwParams) -> DgosSample {
    let mut ln_w = 0.0;
    let values = scheme
        .gamma
        .iter()
        .map(|g| {
            let u: f64 = rng.sample(Open01);
            ln_w += u.ln() / g;
            clamp_open_unit(p.quantile_from_ln(ln_w))
        })
        .collect();
    DgosSample { values }
}

/// Weighted power sums `S⁽ʲ⁾(β) = Σ w_i y_i^β (ln y_i)^j`, `j = 0..=3`, with
/// `y_i = -ln x_i`. Stored as `exp(log_scale) · scaled[j]` so that ratios stay
/// finite for very large β.
#[derive(Debug, Clone, Copy)]
pub struct ShapeSums {
    log_scale: f64,
    scaled: [f64; 4],
}

impl ShapeSums {
    /// `S⁽ʲ⁾(β)`; may overflow to infinity for extreme β.
    #[inline]
    pub fn get(&self, order: usize) -> f64 {
        self.log_scale.exp() * self.scaled[order]
    }

    /// `S⁽ʲ⁾(β) / S(β)`.
    #[inline]
    pub fn ratio(&self, order: usize) -> f64 {
        self.scaled[order] / self.scaled[0]
    }

    pub fn s(&self) -> f64 {
        self.get(0)
    }

    pub fn s1(&self) -> f64 {
        self.get(1)
    }

    pub fn s2(&self) -> f64 {
        self.get(2)
    }

    pub fn s3(&self) -> f64 {
        self.get(3)
    }
}

/// Log-likelihood of a UW dgos sample, with every sample-dependent quantity
/// precomputed once and shared by the likelihood, score, Hessian and the
/// posterior kernels built on top of it.
#[derive(Debug, Clone)]
pub struct DgosLikelihood {
    n: usize,
    weights: Vec<f64>,
    ln_y: Vec<f64>,
    sum_ln_y: f64,
    sum_y: f64,
    log_const: f64,
}

impl DgosLikelihood {
    pub fn new(sample: &DgosSample, scheme: &DgosScheme) -> Result<Self> {
        if sample.len() != scheme.n() {
            return Err(Error::InvalidParameter(format!(
                "sample has {} values but the scheme expects {}",
                sample.len(),
                scheme.n()
            )));
        }
        let y: Vec<f64> = sample.values.iter().map(|x| -x.ln()).collect();
        let ln_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let log_const = scheme.k.ln() + scheme.gamma[..scheme.n - 1].iter().map(|g| g.ln()).sum::<f64>();
        Ok(Self {
            n: scheme.n,
            weights: scheme.weights(),
            sum_ln_y: ln_y.iter().sum(),
            sum_y: y.iter().sum(),
            ln_y,
            log_const,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Σ ln(-ln x_i)`.
    pub fn sum_ln_y(&self) -> f64 {
        self.sum_ln_y
    }

    /// `ln(-ln x_i)` for each observation.
    pub fn ln_y(&self) -> &[f64] {
        &self.ln_y
    }

    /// `ln k + Σ_{j<n} ln γ_j`, the parameter-free part of the log-likelihood.
    pub fn log_const(&self) -> f64 {
        self.log_const
    }

    pub fn shape_sums(&self, beta: f64) -> ShapeSums {
        let log_scale = self
            .weights
            .iter()
            .zip(&self.ln_y)
            .filter(|(w, _)| **w != 0.0)
            .map(|(_, l)| beta * l)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut scaled = [0.0; 4];
        for (w, l) in self.weights.iter().zip(&self.ln_y) {
            if *w == 0.0 {
                continue;
            }
            let t = w * (beta * l - log_scale).exp();
            scaled[0] += t;
            scaled[1] += t * l;
            scaled[2] += t * l * l;
            scaled[3] += t * l * l * l;
        }
        ShapeSums { log_scale, scaled }
    }

    /// `S(β)` alone, without the higher-order sums.
    pub fn s(&self, beta: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.ln_y)
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, l)| w * (beta * l).exp())
            .sum()
    }

    pub fn log_likelihood(&self, p: &UwParams) -> f64 {
        let (a, b) = (p.alpha(), p.beta());
        self.log_const + self.n as f64 * (a * b).ln() + (b - 1.0) * self.sum_ln_y + self.sum_y
            - a * self.s(b)
    }

    /// Gradient `(∂ℓ/∂α, ∂ℓ/∂β)`.
    pub fn score(&self, p: &UwParams) -> (f64, f64) {
        let (a, b) = (p.alpha(), p.beta());
        let n = self.n as f64;
        let sums = self.shape_sums(b);
        (n / a - sums.s(), n / b + self.sum_ln_y - a * sums.s1())
    }

    /// Hessian `[[ℓ_αα, ℓ_αβ], [ℓ_αβ, ℓ_ββ]]`.
    pub fn hessian(&self, p: &UwParams) -> [[f64; 2]; 2] {
        let (a, b) = (p.alpha(), p.beta());
        let n = self.n as f64;
        let sums = self.shape_sums(b);
        let l12 = -sums.s1();
        [[-n / (a * a), l12], [l12, -n / (b * b) - a * sums.s2()]]
    }
}

/// Convenience wrapper around [`DgosLikelihood::log_likelihood`].
pub fn log_likelihood(sample: &DgosSample, scheme: &DgosScheme, p: &UwParams) -> Result<f64> {
    Ok(DgosLikelihood::new(sample, scheme)?.log_likelihood(p))
}
