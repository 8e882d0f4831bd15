use rand::Rng;
use serde::Serialize;

use super::{mean, TestConfig};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapOutcome {
    pub significant: bool,
    /// Observed absolute difference of means.
    pub observed: f64,
    /// Fraction of resamples at least as extreme as `observed`.
    pub p_value: f64,
}

/// Two-sample bootstrap test on the difference of means.
///
/// Both samples are shifted onto the pooled mean so that the null hypothesis
/// holds, then each is resampled with replacement `cfg.bootstrap_resamples`
/// times. The difference is significant when fewer than `1 − confidence` of
/// the resampled differences reach the observed one.
pub fn bootstrap_test(xs: &[f64], ys: &[f64], cfg: &TestConfig) -> Result<BootstrapOutcome> {
    for s in [xs, ys] {
        if s.len() < 2 {
            return Err(Error::TooFewValues {
                what: "bootstrap test",
                needed: 2,
                found: s.len(),
            });
        }
    }
    let mx = mean(xs);
    let my = mean(ys);
    let pooled = (mx * xs.len() as f64 + my * ys.len() as f64) / (xs.len() + ys.len()) as f64;
    let observed = (mx - my).abs();
    let xs0: Vec<f64> = xs.iter().map(|x| x - mx + pooled).collect();
    let ys0: Vec<f64> = ys.iter().map(|y| y - my + pooled).collect();

    let mut rng = rng_for(cfg.seed);
    let mut resample_mean = |s: &[f64]| {
        let total: f64 = (0..s.len()).map(|_| s[rng.random_range(0..s.len())]).sum();
        total / s.len() as f64
    };
    let mut extreme = 0usize;
    for _ in 0..cfg.bootstrap_resamples {
        let d = (resample_mean(&xs0) - resample_mean(&ys0)).abs();
        if d >= observed {
            extreme += 1;
        }
    }
    let p_value = extreme as f64 / cfg.bootstrap_resamples as f64;
    Ok(BootstrapOutcome {
        significant: p_value < 1.0 - cfg.confidence,
        observed,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn identical_constants_are_not_significant() {
        let xs = vec![4.0; 30];
        let out = bootstrap_test(&xs, &xs, &TestConfig::default()).unwrap();
        assert!(!out.significant);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn separated_samples_are_significant() {
        let xs: Vec<f64> = (0..30).map(|i| (i % 5) as f64 * 0.05 - 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + 10.0).collect();
        let out = bootstrap_test(&xs, &ys, &TestConfig::default()).unwrap();
        assert!(out.significant);
        assert!((out.observed - 10.0).abs() < 1e-9);
    }

    #[test]
    fn undersized_samples() {
        assert!(bootstrap_test(&[1.0], &[1.0, 2.0], &TestConfig::default()).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let xs = [0.1, 0.5, 0.3, 0.9, 0.2];
        let ys = [0.4, 0.8, 0.6, 0.7, 1.0];
        let cfg = TestConfig {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(
            bootstrap_test(&xs, &ys, &cfg).unwrap(),
            bootstrap_test(&xs, &ys, &cfg).unwrap()
        );
    }

    proptest! {
        #[test]
        fn self_comparison_never_significant(
            xs in proptest::collection::vec(-10f64..10.0, 2..25),
            seed in any::<u64>(),
        ) {
            let cfg = TestConfig { seed, ..Default::default() };
            prop_assert!(!bootstrap_test(&xs, &xs, &cfg).unwrap().significant);
        }
    }
}
