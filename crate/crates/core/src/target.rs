//! Estimation targets as smooth scalar fields over (α, β).

use std::fmt;

use crate::uw::{ReliabilityQuery, UwParams};

/// Value, gradient and Hessian of a scalar field at one point of (α, β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Self { value, grad: [0.0; 2], hess: [[0.0; 2]; 2] }
    }

    /// Chain rule for `h(self)` given `h`, `h'` and `h''` at `self.value`.
    pub fn compose(&self, h0: f64, h1: f64, h2: f64) -> Self {
        let g = self.grad;
        let mut hess = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                hess[i][j] = h2 * g[i] * g[j] + h1 * self.hess[i][j];
            }
        }
        Self { value: h0, grad: [h1 * g[0], h1 * g[1]], hess }
    }
}

/// Quantity being estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Alpha,
    Beta,
    Reliability(ReliabilityQuery),
}

impl Target {
    /// The target's value at `p`, computed through the distribution module.
    pub fn value(&self, p: &UwParams) -> f64 {
        match self {
            Target::Alpha => p.alpha(),
            Target::Beta => p.beta(),
            Target::Reliability(q) => p.reliability(*q),
        }
    }

    pub fn jet(&self, p: &UwParams) -> Jet {
        match self {
            Target::Alpha => Jet { value: p.alpha(), grad: [1.0, 0.0], hess: [[0.0; 2]; 2] },
            Target::Beta => Jet { value: p.beta(), grad: [0.0, 1.0], hess: [[0.0; 2]; 2] },
            Target::Reliability(q) => {
                // R = 1 - exp(-α u), u = (-ln t)^β
                let (a, b) = (p.alpha(), p.beta());
                let l = (-q.t().ln()).ln();
                let u = (b * l).exp();
                let e = (-a * u).exp();
                let r11 = -u * u * e;
                let r12 = u * l * e * (1.0 - a * u);
                let r22 = a * u * l * l * e * (1.0 - a * u);
                Jet {
                    value: -(-a * u).exp_m1(),
                    grad: [u * e, a * u * l * e],
                    hess: [[r11, r12], [r12, r22]],
                }
            }
        }
    }

    /// Whether `v` is a possible value of the target: α, β > 0, R(t) ∈ (0, 1).
    pub fn admits(&self, v: f64) -> bool {
        match self {
            Target::Alpha | Target::Beta => v > 0.0 && v.is_finite(),
            Target::Reliability(_) => v > 0.0 && v < 1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Target::Alpha => "alpha",
            Target::Beta => "beta",
            Target::Reliability(_) => "R(t)",
        }
    }

    /// `[α, β, R(t)]` for a given reliability time.
    pub fn standard_set(t: ReliabilityQuery) -> [Target; 3] {
        [Target::Alpha, Target::Beta, Target::Reliability(t)]
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
