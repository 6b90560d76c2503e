//! Loss functions and the Bayes-estimator transforms they induce.

use std::fmt;

use crate::error::{Error, Result};
use crate::target::Jet;

/// Floor applied before raising a target to a negative power under GE.
const GE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossKind {
    /// Squared error.
    Squared,
    Linex,
    GeneralEntropy,
}

impl LossKind {
    pub fn label(&self) -> &'static str {
        match self {
            LossKind::Squared => "SELF",
            LossKind::Linex => "LINEX",
            LossKind::GeneralEntropy => "GE",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "self" | "squared" => Ok(LossKind::Squared),
            "linex" => Ok(LossKind::Linex),
            "ge" | "gelf" | "entropy" => Ok(LossKind::GeneralEntropy),
            other => Err(Error::Config(format!("unknown loss `{other}`"))),
        }
    }
}

/// A loss function: SELF, LINEX(c) or GE(c), with `c ≠ 0` for the latter two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    kind: LossKind,
    c: f64,
}

impl LossSpec {
    pub fn squared() -> Self {
        Self { kind: LossKind::Squared, c: 0.0 }
    }

    pub fn linex(c: f64) -> Result<Self> {
        Self::new(LossKind::Linex, c)
    }

    pub fn general_entropy(c: f64) -> Result<Self> {
        Self::new(LossKind::GeneralEntropy, c)
    }

    pub fn new(kind: LossKind, c: f64) -> Result<Self> {
        if kind != LossKind::Squared && !(c != 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{} needs a finite non-zero constant c, got {c}",
                kind.label()
            )));
        }
        let c = if kind == LossKind::Squared { 0.0 } else { c };
        Ok(Self { kind, c })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// The function ζ(θ) whose posterior expectation yields the estimator:
    /// θ, e^(−cθ) or θ^(−c).
    pub fn zeta_value(&self, theta: f64) -> f64 {
        match self.kind {
            LossKind::Squared => theta,
            LossKind::Linex => (-self.c * theta).exp(),
            LossKind::GeneralEntropy => theta.max(GE_FLOOR).powf(-self.c),
        }
    }

    /// ζ(θ(α, β)) with its derivatives, given the target's jet.
    pub fn zeta(&self, theta: &Jet) -> Jet {
        let c = self.c;
        let t = theta.value;
        match self.kind {
            LossKind::Squared => *theta,
            LossKind::Linex => {
                let e = (-c * t).exp();
                theta.compose(e, -c * e, c * c * e)
            }
            LossKind::GeneralEntropy => {
                let t = t.max(GE_FLOOR);
                let v = t.powf(-c);
                theta.compose(v, -c * v / t, c * (c + 1.0) * v / (t * t))
            }
        }
    }

    /// ln ζ(θ(α, β)) with its derivatives: ln θ, −cθ or −c ln θ.
    pub fn log_zeta(&self, theta: &Jet) -> Jet {
        let c = self.c;
        let t = theta.value;
        match self.kind {
            LossKind::Squared => theta.compose(t.ln(), 1.0 / t, -1.0 / (t * t)),
            LossKind::Linex => theta.compose(-c * t, -c, 0.0),
            LossKind::GeneralEntropy => theta.compose(-c * t.ln(), -c / t, c / (t * t)),
        }
    }

    /// Maps an approximation of E[ζ] to the Bayes estimate.
    pub fn finalize(&self, expectation: f64) -> Result<f64> {
        if !expectation.is_finite() {
            return Err(Error::ApproximationOutOfRange(format!(
                "posterior expectation is {expectation}"
            )));
        }
        match self.kind {
            LossKind::Squared => Ok(expectation),
            _ if expectation <= 0.0 => Err(Error::ApproximationOutOfRange(format!(
                "{} needs a positive inner expectation, got {expectation}",
                self.kind.label()
            ))),
            LossKind::Linex => Ok(-expectation.ln() / self.c),
            LossKind::GeneralEntropy => Ok(expectation.powf(-1.0 / self.c)),
        }
    }

    /// Loss incurred by `estimate` when the true value is `truth`.
    pub fn loss_value(&self, estimate: f64, truth: f64) -> Result<f64> {
        if !estimate.is_finite() {
            return Err(Error::InvalidEstimate(format!("estimate is {estimate}")));
        }
        let c = self.c;
        match self.kind {
            LossKind::Squared => Ok((estimate - truth).powi(2)),
            LossKind::Linex => {
                let d = c * (estimate - truth);
                // e^d − d − 1 without cancellation for small d
                Ok(d.exp_m1() - d)
            }
            LossKind::GeneralEntropy => {
                if estimate <= 0.0 {
                    return Err(Error::InvalidEstimate(format!(
                        "GE loss needs a positive estimate, got {estimate}"
                    )));
                }
                if truth <= 0.0 {
                    return Err(Error::InvalidEstimate(format!(
                        "GE loss needs a positive true value, got {truth}"
                    )));
                }
                let lr = (estimate / truth).ln();
                Ok((c * lr).exp_m1() - c * lr)
            }
        }
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LossKind::Squared => f.write_str("SELF"),
            k => write!(f, "{}(c={})", k.label(), self.c),
        }
    }
}

/// Free-function form of [`LossSpec::loss_value`].
pub fn loss_value(loss: &LossSpec, estimate: f64, truth: f64) -> Result<f64> {
    loss.loss_value(estimate, truth)
}
