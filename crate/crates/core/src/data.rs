//! Real-data tools: the e^(−x) transform, lower-record extraction, classical
//! maximum-likelihood fits, the one-sample KS test and the full cotton
//! walkthrough.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::dgos::{DgosLikelihood, DgosSample, DgosScheme};
use crate::error::{Error, Result};
use crate::estimate::{estimate_grid, EngineConfig, EstimateSet, Method};
use crate::loss::{LossKind, LossSpec};
use crate::mcmc::McmcConfig;
use crate::mle::{self, MleOptions};
use crate::prior::GammaPriors;
use crate::roots;
use statrs::distribution::{Continuous, ContinuousCDF, Exp, Gamma, Normal, Weibull};
use statrs::function::gamma::digamma;

use crate::special::{kolmogorov_q, trigamma};
use crate::uw::{ReliabilityQuery, UwParams};

/// US cotton production, 2013–2014 season, in the order reported.
pub const COTTON: [f64; 7] = [2.81, 3.55, 2.81, 3.74, 4.56, 4.0, 4.34];

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    label: String,
}

impl Dataset {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("dataset is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("dataset contains {v}")));
        }
        Ok(Self { values, label: label.into() })
    }

    pub fn cotton() -> Self {
        Self::new(COTTON.to_vec(), "cotton").expect("finite data")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reads a one-column CSV with header `value` (or `x`, as written for
    /// dgos samples).
    pub fn read_csv<R: Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 1 || !matches!(&headers[0], "value" | "x") {
            return Err(Error::Config(format!("expected a single `value` column, found {headers:?}")));
        }
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            values.push(
                rec[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("cannot parse `{}` as a number", &rec[0])))?,
            );
        }
        Self::new(values, label)
    }

    /// Values sorted in descending order, as a dgos sample.
    pub fn descending_sample(&self) -> Result<DgosSample> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        DgosSample::new(v)
    }
}

/// Maps every value `x > 0` to `e^(−x)`.
pub fn transform_unit(data: &Dataset) -> Result<Dataset> {
    if let Some(&v) = data.values.iter().find(|v| **v <= 0.0) {
        return Err(Error::domain("value", v, "(0, inf)"));
    }
    Dataset::new(data.values.iter().map(|x| (-x).exp()).collect(), format!("exp(-{})", data.label))
}

/// Strict running minima in input order, starting with the first value.
pub fn extract_lower_records(data: &Dataset) -> Dataset {
    let mut out: Vec<f64> = Vec::new();
    for &v in &data.values {
        if out.last().is_none_or(|&m| v < m) {
            out.push(v);
        }
    }
    Dataset { values: out, label: format!("records({})", data.label) }
}

/// Distinct values in descending order. Reproduces record lists that were
/// read off a sorted series rather than the chronological one.
pub fn sorted_records(data: &Dataset) -> Dataset {
    let mut v = data.values.clone();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    Dataset { values: v, label: format!("sorted-records({})", data.label) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Weibull,
    Gamma,
    Normal,
    Exponential,
    UnitWeibull,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Weibull, Family::Gamma, Family::Normal, Family::Exponential, Family::UnitWeibull];

    pub fn label(&self) -> &'static str {
        match self {
            Family::Weibull => "weibull",
            Family::Gamma => "gamma",
            Family::Normal => "normal",
            Family::Exponential => "exponential",
            Family::UnitWeibull => "unit_weibull",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.label() == s.trim().to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| Error::Config(format!("unknown family `{s}`")))
    }
}

/// A fitted parametric law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fitted {
    /// Density `(k/λ)(x/λ)^(k−1) e^(−(x/λ)^k)`.
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    UnitWeibull(UwParams),
}

impl Fitted {
    pub fn family(&self) -> Family {
        match self {
            Fitted::Weibull { .. } => Family::Weibull,
            Fitted::Gamma { .. } => Family::Gamma,
            Fitted::Normal { .. } => Family::Normal,
            Fitted::Exponential { .. } => Family::Exponential,
            Fitted::UnitWeibull(_) => Family::UnitWeibull,
        }
    }

    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Fitted::Weibull { shape, scale } => vec![("shape", shape), ("scale", scale)],
            Fitted::Gamma { shape, rate } => vec![("shape", shape), ("rate", rate)],
            Fitted::Normal { mean, sd } => vec![("mean", mean), ("sd", sd)],
            Fitted::Exponential { rate } => vec![("rate", rate)],
            Fitted::UnitWeibull(p) => vec![("alpha", p.alpha()), ("beta", p.beta())],
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        const VALID: &str = "fitted parameters are valid";
        match *self {
            Fitted::Weibull { shape, scale } => Weibull::new(shape, scale).expect(VALID).cdf(x),
            Fitted::Gamma { shape, rate } => Gamma::new(shape, rate).expect(VALID).cdf(x),
            Fitted::Normal { mean, sd } => Normal::new(mean, sd).expect(VALID).cdf(x),
            Fitted::Exponential { rate } => Exp::new(rate).expect(VALID).cdf(x),
            Fitted::UnitWeibull(p) => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    p.cdf(x).expect("inside (0, 1)")
                }
            }
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        const VALID: &str = "fitted parameters are valid";
        match *self {
            Fitted::Weibull { shape, scale } => Weibull::new(shape, scale).expect(VALID).ln_pdf(x),
            Fitted::Gamma { shape, rate } => Gamma::new(shape, rate).expect(VALID).ln_pdf(x),
            Fitted::Normal { mean, sd } => Normal::new(mean, sd).expect(VALID).ln_pdf(x),
            Fitted::Exponential { rate } => Exp::new(rate).expect(VALID).ln_pdf(x),
            Fitted::UnitWeibull(p) => p.ln_pdf(x).unwrap_or(f64::NEG_INFINITY),
        }
    }

    pub fn log_likelihood(&self, values: &[f64]) -> f64 {
        values.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub fitted: Fitted,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
}

impl FitReport {
    fn new(fitted: Fitted, values: &[f64]) -> Self {
        let ll = fitted.log_likelihood(values);
        let k = fitted.parameters().len() as f64;
        Self {
            fitted,
            log_likelihood: ll,
            aic: 2.0 * k - 2.0 * ll,
            bic: k * (values.len() as f64).ln() - 2.0 * ll,
        }
    }

    pub fn distribution(&self) -> Family {
        self.fitted.family()
    }
}

fn require_positive(values: &[f64], family: Family) -> Result<()> {
    match values.iter().find(|v| **v <= 0.0) {
        Some(v) => Err(Error::SupportViolation(format!("{family} needs positive data, found {v}"))),
        None => Ok(()),
    }
}

/// Maximum-likelihood fit of one candidate family.
pub fn fit_classical(data: &Dataset, family: Family) -> Result<FitReport> {
    let x = data.values();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let fitted = match family {
        Family::Normal => {
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            if var <= 0.0 {
                return Err(Error::DegenerateSample("all values are equal".into()));
            }
            Fitted::Normal { mean, sd: var.sqrt() }
        }
        Family::Exponential => {
            require_positive(x, family)?;
            Fitted::Exponential { rate: 1.0 / mean }
        }
        Family::Weibull => {
            require_positive(x, family)?;
            let (shape, scale) = fit_weibull(x)?;
            Fitted::Weibull { shape, scale }
        }
        Family::Gamma => {
            require_positive(x, family)?;
            let shape = fit_gamma_shape(x)?;
            Fitted::Gamma { shape, rate: shape / mean }
        }
        Family::UnitWeibull => {
            if let Some(v) = x.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                return Err(Error::SupportViolation(format!("unit_weibull needs data in (0, 1), found {v}")));
            }
            let sample = data.descending_sample()?;
            let scheme = DgosScheme::order_statistics(x.len())?;
            let lik = DgosLikelihood::new(&sample, &scheme)?;
            Fitted::UnitWeibull(mle::fit(&lik, &MleOptions::default())?.params)
        }
    };
    Ok(FitReport::new(fitted, x))
}

/// Profile equation for the Weibull shape, then the closed-form scale.
fn fit_weibull(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let mean_l = lx.iter().sum::<f64>() / n;
    let top = lx.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lx.iter().all(|l| *l == lx[0]) {
        return Err(Error::DegenerateSample("all values are equal".into()));
    }
    let h = |k: f64| {
        let (mut s0, mut s1) = (0.0, 0.0);
        for l in &lx {
            let w = (k * (l - top)).exp();
            s0 += w;
            s1 += w * l;
        }
        s1 / s0 - 1.0 / k - mean_l
    };
    let root = roots::bracketed(h, 1e-3, 1e3, 1e-14, 500)?;
    let k = root.x;
    let s: f64 = lx.iter().map(|l| (k * (l - top)).exp()).sum::<f64>() / n;
    let scale = (top * k + s.ln()).exp().powf(1.0 / k);
    Ok((k, scale))
}

/// Newton iteration on `ln k − ψ(k) = ln(mean) − mean(ln x)`.
fn fit_gamma_shape(x: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let s = mean.ln() - x.iter().map(|v| v.ln()).sum::<f64>() / n;
    if s.is_nan() || s <= 0.0 {
        return Err(Error::DegenerateSample("all values are equal".into()));
    }
    let mut k = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for it in 0..100 {
        let f = k.ln() - digamma(k) - s;
        let df = 1.0 / k - trigamma(k);
        let mut next = k - f / df;
        if next <= 0.0 {
            next = 0.5 * k;
        }
        if (next - k).abs() <= 1e-12 * k {
            return Ok(next);
        }
        k = next;
        if it == 99 {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: 100, reason: "gamma shape equation".into() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
}

/// One-sample two-sided KS statistic with the asymptotic p-value `Q(√n D)`.
pub fn ks_test(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("KS test needs data".into()));
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult { d, p_value: kolmogorov_q(n.sqrt() * d) })
}

/// Settings for [`analyze_dataset`].
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub priors: GammaPriors,
    pub c: f64,
    pub t: f64,
    pub methods: Vec<Method>,
    pub losses: Vec<LossKind>,
    pub mcmc: McmcConfig,
    /// Use the sorted distinct values instead of the running minima.
    pub sorted_records: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            priors: GammaPriors::prior_one(),
            c: 0.5,
            t: 0.5,
            methods: Method::ALL.to_vec(),
            losses: vec![LossKind::Squared, LossKind::Linex, LossKind::GeneralEntropy],
            mcmc: McmcConfig::default(),
            sorted_records: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DataReport {
    pub data: Dataset,
    pub transformed: Dataset,
    pub records: Dataset,
    /// Fits of the raw data, then the Unit-Weibull fit of the transformed data.
    pub fits: Vec<FitReport>,
    pub ks_weibull: Option<KsResult>,
    pub ks_unit_weibull: Option<KsResult>,
    pub order_statistics: Vec<EstimateSet>,
    pub record_estimates: Vec<EstimateSet>,
}

/// Transform, fit and estimate under both the order-statistics and the
/// lower-record scheme.
pub fn analyze_dataset(data: &Dataset, config: &PipelineConfig) -> Result<DataReport> {
    let transformed = transform_unit(data)?;
    let records = if config.sorted_records {
        sorted_records(&transformed)
    } else {
        extract_lower_records(&transformed)
    };
    let mut fits = Vec::new();
    for family in [Family::Weibull, Family::Gamma, Family::Normal, Family::Exponential] {
        if let Ok(f) = fit_classical(data, family) {
            fits.push(f);
        }
    }
    if let Ok(f) = fit_classical(&transformed, Family::UnitWeibull) {
        fits.push(f);
    }
    let ks_for = |family: Family, values: &[f64]| {
        fits.iter()
            .find(|f| f.distribution() == family)
            .and_then(|f| ks_test(values, |x| f.fitted.cdf(x)).ok())
    };
    let ks_weibull = ks_for(Family::Weibull, data.values());
    let ks_unit_weibull = ks_for(Family::UnitWeibull, transformed.values());

    let mut engine = EngineConfig::new(config.priors, ReliabilityQuery::new(config.t)?);
    engine.mcmc = config.mcmc;
    let mut kinds = config.losses.clone();
    kinds.sort();
    kinds.dedup();
    let losses: Vec<LossSpec> = kinds.into_iter().map(|k| LossSpec::new(k, config.c)).collect::<Result<_>>()?;
    let grid = |values: &Dataset, scheme: Result<DgosScheme>| -> Vec<EstimateSet> {
        if config.methods.is_empty() {
            return Vec::new();
        }
        let lik = values
            .descending_sample()
            .and_then(|s| DgosLikelihood::new(&s, &scheme?));
        match lik {
            Ok(lik) => estimate_grid(&lik, &engine, &config.methods, &losses),
            Err(e) => failed_grid(&config.methods, &losses, &e.to_string()),
        }
    };
    let order_statistics = grid(&transformed, DgosScheme::order_statistics(transformed.len()));
    let record_estimates = grid(&records, DgosScheme::lower_records(records.len()));
    Ok(DataReport {
        data: data.clone(),
        transformed,
        records,
        fits,
        ks_weibull,
        ks_unit_weibull,
        order_statistics,
        record_estimates,
    })
}

fn failed_grid(methods: &[Method], losses: &[LossSpec], msg: &str) -> Vec<EstimateSet> {
    methods
        .iter()
        .flat_map(|&method| {
            losses.iter().map(move |&loss| EstimateSet {
                method,
                loss,
                alpha: Err(msg.to_string()),
                beta: Err(msg.to_string()),
                reliability: Err(msg.to_string()),
            })
        })
        .collect()
}

pub fn analyze_cotton(config: &PipelineConfig) -> Result<DataReport> {
    analyze_dataset(&Dataset::cotton(), config)
}

/// Six decimals, switching to six-digit scientific notation below 10⁻³ so
/// that small values keep their significant digits.
pub fn fmt6(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.6e}")
    } else {
        format!("{v:.6}")
    }
}

impl DataReport {
    /// CSV blocks separated by `#` comment lines: fits, KS tests, records and
    /// the two estimate tables. Failed cells print `NA`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# dataset={} n={}", self.data.label(), self.data.len())?;
        writeln!(out, "# fits")?;
        writeln!(out, "distribution,parameters,log_likelihood,aic,bic")?;
        for f in &self.fits {
            let params: Vec<String> =
                f.fitted.parameters().iter().map(|(k, v)| format!("{k}={}", fmt6(*v))).collect();
            writeln!(
                out,
                "{},{},{},{},{}",
                f.distribution(),
                params.join(";"),
                fmt6(f.log_likelihood),
                fmt6(f.aic),
                fmt6(f.bic)
            )?;
        }
        writeln!(out, "# ks")?;
        writeln!(out, "reference,D,p_value")?;
        for (name, ks) in [("weibull", self.ks_weibull), ("unit_weibull", self.ks_unit_weibull)] {
            if let Some(k) = ks {
                writeln!(out, "{name},{},{}", fmt6(k.d), fmt6(k.p_value))?;
            }
        }
        writeln!(out, "# records")?;
        writeln!(out, "value")?;
        for v in self.records.values() {
            writeln!(out, "{}", fmt6(*v))?;
        }
        for (scheme, sets) in [("order_statistics", &self.order_statistics), ("lower_records", &self.record_estimates)] {
            writeln!(out, "# estimates scheme={scheme}")?;
            write_estimates(&mut out, sets)?;
        }
        Ok(())
    }
}

/// Estimate grid as CSV with columns `method,loss,alpha,beta,R`.
pub fn write_estimates<W: Write>(mut out: W, sets: &[EstimateSet]) -> Result<()> {
    writeln!(out, "method,loss,alpha,beta,R")?;
    for s in sets {
        let cells: Vec<String> = s
            .cells()
            .iter()
            .map(|c| c.as_ref().map_or_else(|_| "NA".to_string(), |v| fmt6(*v)))
            .collect();
        writeln!(out, "{},{},{}", s.method, s.loss.kind().label(), cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ds(v: &[f64]) -> Dataset {
        Dataset::new(v.to_vec(), "t").unwrap()
    }

    #[test]
    fn transform_examples() {
        let t = transform_unit(&Dataset::cotton()).unwrap();
        assert_eq!(format!("{:.4}", t.values()[0]), "0.0602");
        for (x, u) in COTTON.iter().zip(t.values()) {
            assert!((-u.ln() - x).abs() < 1e-12);
        }
        assert!(transform_unit(&ds(&[1.0, 0.0])).is_err());
        assert!(transform_unit(&ds(&[-2.0])).is_err());
    }

    #[test]
    fn record_examples() {
        assert_eq!(extract_lower_records(&ds(&[1.0, 0.5, 0.8, 0.3])).values(), &[1.0, 0.5, 0.3]);
        assert_eq!(extract_lower_records(&ds(&[0.4])).values(), &[0.4]);
        let t = transform_unit(&Dataset::cotton()).unwrap();
        let r: Vec<String> = extract_lower_records(&t).values().iter().map(|v| format!("{v:.4}")).collect();
        assert_eq!(r, ["0.0602", "0.0287", "0.0238", "0.0105"]);
        let s: Vec<String> = sorted_records(&t).values().iter().map(|v| format!("{v:.4}")).collect();
        assert_eq!(s, ["0.0602", "0.0287", "0.0238", "0.0183", "0.0130", "0.0105"]);
    }

    #[test]
    fn fit_identities_and_local_maxima() {
        let data = Dataset::cotton();
        for family in [Family::Weibull, Family::Gamma, Family::Normal, Family::Exponential] {
            let f = fit_classical(&data, family).unwrap();
            let k = f.fitted.parameters().len() as f64;
            assert_eq!(f.aic, 2.0 * k - 2.0 * f.log_likelihood);
            assert_eq!(f.bic, k * 7f64.ln() - 2.0 * f.log_likelihood);
        }
        for family in [Family::Weibull, Family::Gamma] {
            let f = fit_classical(&data, family).unwrap();
            let p = f.fitted.parameters();
            for i in 0..2 {
                for s in [0.95, 1.05] {
                    let mut q = [p[0].1, p[1].1];
                    q[i] *= s;
                    let g = match family {
                        Family::Weibull => Fitted::Weibull { shape: q[0], scale: q[1] },
                        _ => Fitted::Gamma { shape: q[0], rate: q[1] },
                    };
                    assert!(g.log_likelihood(data.values()) <= f.log_likelihood);
                }
            }
        }
    }

    #[test]
    fn gamma_shape_solves_its_equation() {
        let x = COTTON;
        let k = fit_gamma_shape(&x).unwrap();
        let mean = x.iter().sum::<f64>() / 7.0;
        let s = mean.ln() - x.iter().map(|v| v.ln()).sum::<f64>() / 7.0;
        assert!((k.ln() - digamma(k) - s).abs() < 1e-12);
    }

    #[test]
    fn support_violations() {
        assert!(matches!(fit_classical(&ds(&[0.5, 1.5]), Family::UnitWeibull), Err(Error::SupportViolation(_))));
        assert!(matches!(fit_classical(&ds(&[-0.5, 1.5]), Family::Gamma), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn weibull_and_unit_weibull_fits_correspond() {
        let w = fit_classical(&Dataset::cotton(), Family::Weibull).unwrap();
        let t = transform_unit(&Dataset::cotton()).unwrap();
        let u = fit_classical(&t, Family::UnitWeibull).unwrap();
        let (Fitted::Weibull { shape, scale }, Fitted::UnitWeibull(p)) = (w.fitted, u.fitted) else {
            unreachable!()
        };
        assert_relative_eq!(p.beta(), shape, max_relative = 1e-6);
        assert_relative_eq!(p.alpha(), scale.powf(-shape), max_relative = 1e-5);
    }

    #[test]
    fn ks_at_plotting_positions() {
        let n = 9;
        let x: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        let ks = ks_test(&x, |v| v).unwrap();
        assert!(ks.d < 1.0 / n as f64 + 1.0 / (n + 1) as f64);
        assert_relative_eq!(ks.d, 1.0 / (n + 1) as f64, max_relative = 1e-12);
    }

    #[test]
    fn ks_is_invariant_under_increasing_maps() {
        let f = Fitted::Weibull { shape: 2.0, scale: 3.0 };
        let x = [0.7, 2.1, 3.3, 1.4, 5.0, 2.8];
        let a = ks_test(&x, |v| f.cdf(v)).unwrap();
        let u: Vec<f64> = x.iter().map(|v| f.cdf(*v)).collect();
        let b = ks_test(&u, |v| v).unwrap();
        assert_relative_eq!(a.d, b.d, max_relative = 1e-12);
    }

    #[test]
    fn cdfs_agree_with_densities() {
        let cases = [
            Fitted::Weibull { shape: 2.0, scale: 3.0 },
            Fitted::Gamma { shape: 3.5, rate: 1.2 },
            Fitted::Normal { mean: 1.0, sd: 0.7 },
            Fitted::Exponential { rate: 0.4 },
            Fitted::UnitWeibull(UwParams::new(1.5, 1.5).unwrap()),
        ];
        for f in cases {
            let x = match f {
                Fitted::UnitWeibull(_) => 0.4,
                _ => 1.7,
            };
            let h = 1e-5;
            let fd = (f.cdf(x + h) - f.cdf(x - h)) / (2.0 * h);
            assert_relative_eq!(fd, f.ln_pdf(x).exp(), max_relative = 1e-6);
        }
    }

    #[test]
    fn empty_method_list_gives_summary_only() {
        let cfg = PipelineConfig { methods: vec![], ..PipelineConfig::default() };
        let r = analyze_cotton(&cfg).unwrap();
        assert!(r.order_statistics.is_empty() && r.record_estimates.is_empty());
        assert_eq!(r.records.len(), 4);
        assert_eq!(r.fits.len(), 5);
    }

    #[test]
    fn csv_dataset_reader() {
        let d = Dataset::read_csv("value\n2.5\n 3.0\n".as_bytes(), "x").unwrap();
        assert_eq!(d.values(), &[2.5, 3.0]);
        assert_eq!(Dataset::read_csv("x\n0.5\n".as_bytes(), "x").unwrap().values(), &[0.5]);
        assert!(Dataset::read_csv("y\n1\n".as_bytes(), "x").is_err());
        assert!(Dataset::read_csv("value\n".as_bytes(), "x").is_err());
    }
}
