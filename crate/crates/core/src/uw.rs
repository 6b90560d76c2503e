//! The Unit-Weibull law on (0, 1).
//!
//! With `y = -ln x`, the density is `α β y^(β-1) exp(-α y^β) / x` and the
//! distribution function is `exp(-α y^β)`. Powers of `y` are evaluated as
//! `exp(β ln y)` so that draws close to either end of the support stay finite.

use rand::Rng;
use rand_distr::Open01;

use crate::error::{Error, Result};

/// Shape parameters (α, β) of a Unit-Weibull distribution. Both are strictly
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UwParams {
    alpha: f64,
    beta: f64,
}

/// A reliability time `t` in the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityQuery {
    t: f64,
}

impl ReliabilityQuery {
    pub fn new(t: f64) -> Result<Self> {
        if t > 0.0 && t < 1.0 {
            Ok(Self { t })
        } else {
            Err(Error::domain("t", t, "(0, 1)"))
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

fn check_unit(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(what, x, "(0, 1)"))
    }
}

impl UwParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `α (-ln x)^β`, the cumulative hazard of the underlying Weibull.
    #[inline]
    fn hazard(&self, x: f64) -> f64 {
        self.alpha * (self.beta * (-x.ln()).ln()).exp()
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        let ln_y = (-x.ln()).ln();
        Ok(self.alpha.ln() + self.beta.ln() - x.ln() + (self.beta - 1.0) * ln_y
            - self.alpha * (self.beta * ln_y).exp())
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.ln_pdf(x).map(f64::exp)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok((-self.hazard(x)).exp())
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_unit("u", u)?;
        Ok(self.quantile_from_ln(u.ln()))
    }

    /// Quantile at `u = exp(ln_u)`; lets callers keep products of uniforms in
    /// log space.
    pub(crate) fn quantile_from_ln(&self, ln_u: f64) -> f64 {
        let ln_y = ((-ln_u).ln() - self.alpha.ln()) / self.beta;
        (-(ln_y.exp())).exp()
    }

    /// R(t) = 1 - F(t).
    pub fn reliability(&self, q: ReliabilityQuery) -> f64 {
        1.0 - (-self.hazard(q.t)).exp()
    }

    /// Independent draws by inverse-transform sampling.
    pub fn sample_iid<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        Ok((0..count)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                clamp_open_unit(self.quantile_from_ln(u.ln()))
            })
            .collect())
    }
}

/// Pushes values that rounded onto the boundary back into (0, 1).
pub(crate) fn clamp_open_unit(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(a: f64, b: f64) -> UwParams {
        UwParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(UwParams::new(0.0, 1.0).is_err());
        assert!(UwParams::new(1.0, -2.0).is_err());
        assert!(UwParams::new(f64::NAN, 1.0).is_err());
        assert!(ReliabilityQuery::new(1.0).is_err());
        assert!(ReliabilityQuery::new(0.0).is_err());
    }

    #[test]
    fn pdf_examples() {
        assert_relative_eq!(p(1.0, 1.0).pdf(0.3).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(p(2.0, 1.0).pdf(0.5).unwrap(), 1.0, max_relative = 1e-14);
        // 40-digit evaluation of the closed form
        assert_relative_eq!(
            p(1.5, 1.5).pdf(0.5).unwrap(),
            1.576_483_311_895_056_5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn cdf_examples() {
        assert_relative_eq!(p(1.0, 1.0).cdf(0.5).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(p(2.0, 1.0).cdf(0.5).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(
            p(1.5, 1.5).cdf(0.5).unwrap(),
            0.420_788_762_887_784_5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn quantile_examples() {
        assert_relative_eq!(p(1.0, 1.0).quantile(0.5).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(p(2.0, 1.0).quantile(0.25).unwrap(), 0.5, max_relative = 1e-15);
        let q = p(1.5, 0.7);
        for &x in &[0.1, 0.5, 0.9] {
            assert_relative_eq!(q.quantile(q.cdf(x).unwrap()).unwrap(), x, max_relative = 1e-12);
        }
    }

    #[test]
    fn reliability_examples() {
        let half = ReliabilityQuery::new(0.5).unwrap();
        assert_relative_eq!(p(1.0, 1.0).reliability(half), 0.5, max_relative = 1e-15);
        assert_relative_eq!(p(2.0, 1.0).reliability(half), 0.75, max_relative = 1e-15);
        assert_relative_eq!(
            p(1.5, 1.5).reliability(half),
            0.579_211_237_112_215_5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn boundaries_are_domain_errors() {
        let q = p(1.0, 2.0);
        for &x in &[0.0, 1.0, -0.1, 1.5] {
            assert!(q.pdf(x).is_err());
            assert!(q.cdf(x).is_err());
            assert!(q.quantile(x).is_err());
        }
    }

    #[test]
    fn sample_mean_and_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(p(1.0, 1.0).sample_iid(&mut rng, 0).is_err());
        let xs = p(1.0, 1.0).sample_iid(&mut rng, 100_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn sample_matches_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = p(1.5, 2.5);
        let mut xs = q.sample_iid(&mut rng, 10_000).unwrap();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = q.cdf(x).unwrap();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.02, "KS distance {d}");
    }

    #[test]
    fn pdf_integrates_to_one() {
        // composite Simpson in y = -ln x, where the density is Weibull; the
        // change of variables keeps both tails well resolved
        for &a in &[0.5, 1.0, 2.0, 3.0] {
            for &b in &[0.5, 1.0, 2.0, 3.0] {
                let q = p(a, b);
                // y-range covering all but 1e-12 of the mass, capped where x underflows
                let eps: f64 = 1e-12;
                let lo = (-(1.0 - eps).ln() / a).powf(1.0 / b).max(1e-12);
                let hi = ((-eps.ln() / a).powf(1.0 / b)).min(700.0);
                let (ulo, uhi) = (lo.ln(), hi.ln());
                let m = 20_000;
                let h = (uhi - ulo) / m as f64;
                let g = |u: f64| {
                    let y = u.exp();
                    let x = (-y).exp();
                    q.pdf(x).unwrap() * x * y
                };
                let mut s = g(ulo) + g(uhi);
                for i in 1..m {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * g(ulo + i as f64 * h);
                }
                let total = s * h / 3.0;
                let mass = q.cdf((-lo).exp()).unwrap() - q.cdf((-hi).exp()).unwrap();
                assert!(mass > 1.0 - 1e-5);
                assert!((total - mass).abs() < 1e-6, "a={a} b={b} total={total}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn cdf_quantile_roundtrip(a in 0.2f64..5.0, b in 0.2f64..5.0, u in 0.001f64..0.999) {
            let q = p(a, b);
            let x = q.quantile(u).unwrap();
            // near x = 1 the quantile itself is not representable to 1e-10
            proptest::prop_assume!(1.0 - x > 1e-4);
            let back = q.cdf(x).unwrap();
            proptest::prop_assert!(((back - u) / u).abs() < 1e-10);
        }

        #[test]
        fn cdf_increasing(a in 0.2f64..5.0, b in 0.2f64..5.0, x in 0.01f64..0.98) {
            let q = p(a, b);
            let (lo, hi) = (q.cdf(x).unwrap(), q.cdf(x + 0.01).unwrap());
            proptest::prop_assert!(hi >= lo);
            if lo > 1e-300 {
                proptest::prop_assert!(hi > lo);
            }
        }

        #[test]
        fn power_function_submodel(a in 0.2f64..5.0, x in 0.01f64..0.99) {
            let q = p(a, 1.0);
            let expect = x.powf(a);
            proptest::prop_assert!((q.cdf(x).unwrap() - expect).abs() <= 64.0 * f64::EPSILON * expect);
        }

        #[test]
        fn reliability_complements_cdf(a in 0.2f64..5.0, b in 0.2f64..5.0, t in 0.01f64..0.99) {
            let q = p(a, b);
            let r = q.reliability(ReliabilityQuery::new(t).unwrap());
            proptest::prop_assert!((r + q.cdf(t).unwrap() - 1.0).abs() <= f64::EPSILON);
        }
    }
}
