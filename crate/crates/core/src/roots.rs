//! Bracketed scalar root finding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Bisection/secant hybrid (Illinois variant of regula falsi, falling back to
/// bisection when the interpolated point is not shrinking the bracket fast
/// enough). `f(lo)` and `f(hi)` must differ in sign.
pub(crate) fn bracketed<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Root> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) {
        return Err(Error::NoConvergence {
            iterations: 0,
            reason: format!("non-finite function value at bracket [{lo}, {hi}]"),
        });
    }
    if flo == 0.0 {
        return Ok(Root { x: lo, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(Root { x: hi, iterations: 0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence {
            iterations: 0,
            reason: format!("no sign change on [{lo}, {hi}]"),
        });
    }
    let mut side = 0i8;
    for it in 1..=max_iter {
        let width = hi - lo;
        let mut x = (lo * fhi - hi * flo) / (fhi - flo);
        // keep the secant point well inside the bracket
        if !(x > lo + 0.01 * width && x < hi - 0.01 * width) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                reason: format!("non-finite function value at {x}"),
            });
        }
        if fx.abs() < ftol || (hi - lo) <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(Root { x, iterations: it });
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        // bisect every few steps to guarantee linear shrinkage
        if it % 4 == 0 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm.abs() < ftol {
                return Ok(Root { x: mid, iterations: it });
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
            side = 0;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        reason: "bracketed root search exhausted".into(),
    })
}
