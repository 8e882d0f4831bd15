//! Performance scores: confusion-matrix rates, G-score, MAR and
//! Standardized Accuracy.

use serde::Serialize;

use crate::data::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Recall. Zero when the truth has no positives.
    pub fn pd(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// False-alarm rate. Zero when the truth has no negatives.
    pub fn pf(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn g_score(&self) -> f64 {
        // pd and pf are in [0, 1] by construction
        g_score(self.pd(), self.pf()).unwrap_or(0.0)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn confusion(predictions: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("label vector"));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in predictions.iter().zip(truth) {
        match (p.is_positive(), t.is_positive()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn pd_pf(cm: &ConfusionMatrix) -> (f64, f64) {
    (cm.pd(), cm.pf())
}

/// Harmonic mean of recall and `1 - pf`: `2·pd·(1−pf) / (1 + pd − pf)`.
/// Defined as 0 when the denominator vanishes (`pd = 0`, `pf = 1`).
pub fn g_score(pd: f64, pf: f64) -> Result<f64> {
    for (what, v) in [("pd", pd), ("pf", pf)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { what, value: v });
        }
    }
    let den = 1.0 + pd - pf;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * pd * (1.0 - pf) / den)
}

/// Paired true and predicted values of a regression run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionOutcome {
    truth: Vec<f64>,
    predictions: Vec<f64>,
}

impl RegressionOutcome {
    pub fn new(truth: Vec<f64>, predictions: Vec<f64>) -> Result<Self> {
        if truth.len() != predictions.len() {
            return Err(Error::LengthMismatch {
                left: truth.len(),
                right: predictions.len(),
            });
        }
        Ok(Self { truth, predictions })
    }

    pub fn n(&self) -> usize {
        self.truth.len()
    }

    pub fn truth(&self) -> &[f64] {
        &self.truth
    }

    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }
}

/// Mean absolute residual.
pub fn mar(outcome: &RegressionOutcome) -> Result<f64> {
    if outcome.n() == 0 {
        return Err(Error::Empty("regression outcome"));
    }
    let total: f64 = outcome
        .truth
        .iter()
        .zip(&outcome.predictions)
        .map(|(t, p)| (p - t).abs())
        .sum();
    Ok(total / outcome.n() as f64)
}

/// `(2/n²)·Σ_{j<i} |y_i − y_j|`, computed from the sorted values: the k-th
/// smallest of n values appears with sign + in k pairs and − in n−1−k.
pub fn pairwise_baseline(truth: &[f64]) -> f64 {
    let n = truth.len();
    if n == 0 {
        return 0.0;
    }
    let mut sorted = truth.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(k, y)| y * (2.0 * k as f64 - (n as f64 - 1.0)))
        .sum();
    2.0 * sum / (n * n) as f64
}

/// Standardized Accuracy in percent: `(1 − MAR/D) × 100` with `D` the mean
/// pairwise absolute difference of the true values. 100 is perfect, 0 is no
/// better than the pairwise baseline, negative is worse.
pub fn sa(outcome: &RegressionOutcome) -> Result<f64> {
    if outcome.n() < 2 {
        return Err(Error::TooFewValues {
            what: "standardized accuracy",
            needed: 2,
            found: outcome.n(),
        });
    }
    let d = pairwise_baseline(&outcome.truth);
    if d <= 0.0 {
        return Err(Error::UndefinedBaseline);
    }
    Ok((1.0 - mar(outcome)? / d) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScoreKind {
    G,
    SA,
    Pd,
    Pf,
    Precision,
    Accuracy,
    MAR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub kind: ScoreKind,
    pub value: f64,
}

impl Score {
    pub fn new(kind: ScoreKind, value: f64) -> Result<Score> {
        let ok = match kind {
            ScoreKind::SA => value.is_finite() && value <= 100.0,
            ScoreKind::MAR => value.is_finite() && value >= 0.0,
            _ => (0.0..=1.0).contains(&value),
        };
        if !ok {
            return Err(Error::OutOfRange { what: "score", value });
        }
        Ok(Score { kind, value })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[P, P, N, N], &[P, N, P, N]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 1
            }
        );
        let cm = confusion(&[P, P, N], &[P, P, N]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 2,
                fp: 0,
                tn: 1,
                fn_: 0
            }
        );
        let cm = confusion(&[N, N], &[P, P]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 0,
                fp: 0,
                tn: 0,
                fn_: 2
            }
        );
        assert!(confusion(&[P], &[P, N]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn rates_and_degenerate_denominators() {
        let cm = ConfusionMatrix {
            tp: 7,
            fn_: 3,
            fp: 3,
            tn: 7,
        };
        let (pd, pf) = pd_pf(&cm);
        assert!((pd - 0.7).abs() < 1e-15 && (pf - 0.3).abs() < 1e-15);
        assert_eq!(
            ConfusionMatrix {
                tp: 0,
                fn_: 0,
                fp: 2,
                tn: 1
            }
            .pd(),
            0.0
        );
        assert_eq!(
            ConfusionMatrix {
                tp: 1,
                fn_: 0,
                fp: 0,
                tn: 5
            }
            .pf(),
            0.0
        );
        assert_eq!(
            ConfusionMatrix {
                tp: 0,
                fn_: 0,
                fp: 0,
                tn: 0
            }
            .precision(),
            0.0
        );
        assert!((cm.accuracy() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn g_score_values() {
        assert_eq!(g_score(1.0, 0.0).unwrap(), 1.0);
        for pf in [0.0, 0.3, 1.0] {
            assert_eq!(g_score(0.0, pf).unwrap(), 0.0);
        }
        // 2·0.7·0.7 / (1 + 0.7 − 0.3) = 0.98 / 1.4
        assert!((g_score(0.7, 0.3).unwrap() - 0.7).abs() < 1e-12);
        assert!(g_score(1.2, 0.0).is_err());
        assert!(g_score(0.5, -0.1).is_err());
    }

    #[test]
    fn mar_and_sa_values() {
        let o = |t: &[f64], p: &[f64]| RegressionOutcome::new(t.to_vec(), p.to_vec()).unwrap();
        assert_eq!(mar(&o(&[1.0, 3.0], &[1.0, 3.0])).unwrap(), 0.0);
        assert_eq!(mar(&o(&[1.0, 3.0], &[2.0, 2.0])).unwrap(), 1.0);
        assert_eq!(mar(&o(&[5.0], &[2.0])).unwrap(), 3.0);
        assert!(mar(&o(&[], &[])).is_err());

        assert_eq!(sa(&o(&[1.0, 3.0, 8.0], &[1.0, 3.0, 8.0])).unwrap(), 100.0);
        // MAR = 1, D = (2/4)·2 = 1
        assert!(sa(&o(&[1.0, 3.0], &[2.0, 2.0])).unwrap().abs() < 1e-12);
        assert!(matches!(
            sa(&o(&[4.0, 4.0], &[1.0, 2.0])),
            Err(Error::UndefinedBaseline)
        ));
        assert!(sa(&o(&[4.0], &[4.0])).is_err());
        assert!(sa(&o(&[0.0, 1.0], &[50.0, -50.0])).unwrap() < 0.0);
    }

    #[test]
    fn score_ranges() {
        assert!(Score::new(ScoreKind::G, 0.5).is_ok());
        assert!(Score::new(ScoreKind::G, 1.5).is_err());
        assert!(Score::new(ScoreKind::SA, -250.0).is_ok());
        assert!(Score::new(ScoreKind::MAR, -1.0).is_err());
    }

    #[test]
    fn sa_of_random_guessing_is_near_zero() {
        use rand::Rng;
        use rand_distr::{Distribution, Normal};
        let mut rng = crate::seed::rng_for(11);
        let normal = Normal::new(50.0, 10.0).unwrap();
        let train: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
        let truth: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
        let guesses: Vec<f64> = (0..1000).map(|_| train[rng.random_range(0..train.len())]).collect();
        let score = sa(&RegressionOutcome::new(truth, guesses).unwrap()).unwrap();
        assert!(score.abs() < 10.0, "{score}");
    }

    proptest! {
        #[test]
        fn g_is_monotone(pd in 0.0f64..=1.0, pf in 0.0f64..=1.0, d in 0.0f64..0.2) {
            let g = g_score(pd, pf).unwrap();
            prop_assert!(g_score((pd + d).min(1.0), pf).unwrap() >= g - 1e-12);
            prop_assert!(g_score(pd, (pf + d).min(1.0)).unwrap() <= g + 1e-12);
        }

        #[test]
        fn g_is_harmonic_mean(pd in 0.001f64..=1.0, pf in 0.0f64..0.999) {
            let tnr = 1.0 - pf;
            let harmonic = 2.0 / (1.0 / pd + 1.0 / tnr);
            prop_assert!((g_score(pd, pf).unwrap() - harmonic).abs() < 1e-12);
        }

        #[test]
        fn rates_in_unit_interval(tp in 0u64..50, fp in 0u64..50, tn in 0u64..50, fn_ in 0u64..50) {
            prop_assume!(tp + fp + tn + fn_ > 0);
            let cm = ConfusionMatrix { tp, fp, tn, fn_ };
            for v in [cm.pd(), cm.pf(), cm.precision(), cm.accuracy(), cm.g_score()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(cm.accuracy(), (tp + tn) as f64 / (tp + fp + tn + fn_) as f64);
        }

        #[test]
        fn mar_zero_iff_exact(truth in proptest::collection::vec(-100f64..100.0, 1..20), bump in 0usize..40) {
            let mut preds = truth.clone();
            let exact = bump >= truth.len();
            if !exact {
                preds[bump] += 1.0;
            }
            let m = mar(&RegressionOutcome::new(truth, preds).unwrap()).unwrap();
            prop_assert!(m >= 0.0);
            prop_assert_eq!(m == 0.0, exact);
        }
    }
}
