//! Non-parametric comparison and ranking of score distributions.

mod a12;
mod bootstrap;
mod scott_knott;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use a12::{a12, a12_effect};
pub use bootstrap::{bootstrap_test, BootstrapOutcome};
pub use scott_knott::{expected_delta, scott_knott, Direction, RankGroup, RankedGroups};

/// Named repeated-run scores for one treatment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub name: String,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<SampleSet> {
        if values.is_empty() {
            return Err(Error::Empty("sample set"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::OutOfRange {
                what: "sample value",
                value: *v,
            });
        }
        Ok(SampleSet {
            name: name.into(),
            values,
        })
    }

    pub fn median(&self) -> f64 {
        quantile(&self.values, 0.5)
    }

    pub fn summary(&self) -> Summary {
        Summary::of(&self.values)
    }
}

/// Test parameters shared by the bootstrap test, the A12 gate and Scott-Knott.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub bootstrap_resamples: usize,
    pub confidence: f64,
    pub a12_threshold: f64,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            bootstrap_resamples: 512,
            confidence: 0.99,
            a12_threshold: 0.6,
            seed: 0,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bootstrap_resamples == 0 {
            return Err(Error::Config("bootstrap resamples must be positive".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!("confidence {} not in (0, 1)", self.confidence)));
        }
        if !(0.5..=1.0).contains(&self.a12_threshold) {
            return Err(Error::Config(format!(
                "effect threshold {} not in [0.5, 1]",
                self.a12_threshold
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> TestConfig {
        TestConfig { seed, ..self }
    }
}

/// Linear-interpolation quantile (the common "type 7" definition).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub median: f64,
    pub iqr: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            return Summary {
                n: 0,
                median: f64::NAN,
                iqr: f64::NAN,
                mean: f64::NAN,
            };
        }
        Summary {
            n: sorted.len(),
            median: quantile_sorted(&sorted, 0.5),
            iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
            mean: mean(&sorted),
        }
    }
}
