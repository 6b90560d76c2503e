//! Special functions not provided by `statrs`: trigamma and the Kolmogorov
//! distribution tail.

use std::f64::consts::PI;

/// Trigamma ψ'(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv * inv2
            * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0))));
    acc + series
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²).
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // The alternating series cancels badly here; Q is 1 to ~1e-10.
        let p = (2.0 * PI).sqrt() / lambda
            * (1..=50)
                .map(|j| {
                    let k = (2 * j - 1) as f64;
                    (-k * k * PI * PI / (8.0 * lambda * lambda)).exp()
                })
                .sum::<f64>();
        return (1.0 - p).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
