mod common;

use uwbayes::{GammaPriors, ReliabilityQuery};

#[test]
fn analytic_derivatives_match_central_differences() {
    let grid = common::concordance_grid();
    assert!(grid.len() >= 18, "only {} usable points", grid.len());
    let t = ReliabilityQuery::new(0.5).unwrap();
    let mut worst = (0.0, String::new());
    for (lik, at) in &grid {
        for prior in [GammaPriors::prior_one(), GammaPriors::prior_two()] {
            for c in common::derivative_checks(lik, &prior, at, t) {
                if c.rel_error() > worst.0 {
                    worst = (c.rel_error(), format!("{c:?} at {at:?}"));
                }
            }
        }
    }
    assert!(worst.0 < 1e-5, "worst: {} ({})", worst.0, worst.1);
}
