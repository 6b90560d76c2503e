use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::uw::UwParams;

/// Independent gamma priors `α ~ Gamma(a1, rate b1)`, `β ~ Gamma(a2, rate b2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPriors {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl GammaPriors {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        for (name, v) in [("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "prior hyperparameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self { a1, b1, a2, b2 })
    }

    /// `(a_i, b_i) = (2, 2)`.
    pub fn prior_one() -> Self {
        Self { a1: 2.0, b1: 2.0, a2: 2.0, b2: 2.0 }
    }

    /// `(a_i, b_i) = (0.05, 0.05)`.
    pub fn prior_two() -> Self {
        Self { a1: 0.05, b1: 0.05, a2: 0.05, b2: 0.05 }
    }

    /// Log prior density up to an additive constant.
    pub fn log_kernel(&self, p: &UwParams) -> f64 {
        let (a, b) = (p.alpha(), p.beta());
        (self.a1 - 1.0) * a.ln() - self.b1 * a + (self.a2 - 1.0) * b.ln() - self.b2 * b
    }

    /// `(φ₁, φ₂)`, the gradient of the log prior.
    pub fn gradient(&self, p: &UwParams) -> (f64, f64) {
        (
            (self.a1 - 1.0) / p.alpha() - self.b1,
            (self.a2 - 1.0) / p.beta() - self.b2,
        )
    }
}

impl fmt::Display for GammaPriors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a1, self.b1, self.a2, self.b2)
    }
}

/// Parses `a1,b1,a2,b2`.
impl FromStr for GammaPriors {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("cannot parse priors `{s}`")))?;
        match parts[..] {
            [a1, b1, a2, b2] => Self::new(a1, b1, a2, b2),
            _ => Err(Error::Config(format!("priors need four values a1,b1,a2,b2, got `{s}`"))),
        }
    }
}
