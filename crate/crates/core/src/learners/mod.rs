//! Prediction machinery: class rebalancing, CART trees, random forests and
//! the transfer-strategy interface.

mod forest;
mod strategy;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::data::{Label, ProjectDataset, Target, TaskKind};
use crate::error::{Error, Result};
use crate::seed::rng_for;

pub use forest::{feature_importance, predict, train_forest, Forest, Predictions, TrainingMeta};
pub use strategy::{
    DirectStrategy, LearnerConfig, StrategyBuilder, StrategyRegistry, StrategySpec, TransferStrategy,
    RESERVED_STRATEGIES,
};
pub use tree::DecisionTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeaturesPerSplit {
    /// `round(sqrt(attribute count))`, at least 1.
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, n_attributes: usize) -> usize {
        let k = match self {
            FeaturesPerSplit::Sqrt => (n_attributes as f64).sqrt().round() as usize,
            FeaturesPerSplit::All => n_attributes,
            FeaturesPerSplit::Count(k) => k,
        };
        k.clamp(1, n_attributes.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeaturesPerSplit,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: FeaturesPerSplit::Sqrt,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        if self.features_per_split == FeaturesPerSplit::Count(0) {
            return Err(Error::Config("features_per_split must be positive".into()));
        }
        Ok(())
    }
}

/// Target positive:negative ratio for training data, `1:2` by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub positive: u32,
    pub negative: u32,
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio {
            positive: 1,
            negative: 2,
        }
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ratio> {
        let bad = || Error::Config(format!("ratio '{s}' is not of the form pos:neg"));
        let (p, n) = s.split_once(':').ok_or_else(bad)?;
        let positive: u32 = p.trim().parse().map_err(|_| bad())?;
        let negative: u32 = n.trim().parse().map_err(|_| bad())?;
        if positive == 0 || negative == 0 {
            return Err(bad());
        }
        Ok(Ratio { positive, negative })
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.positive, self.negative)
    }
}

/// Randomly subsamples whichever class is over-represented relative to
/// `ratio`, without replacement. The minority class is never duplicated and
/// surviving rows keep their original order and values.
pub fn rebalance(data: &ProjectDataset, ratio: Ratio, seed: u64) -> Result<ProjectDataset> {
    let Target::Labels(labels) = data.target() else {
        return Err(Error::WrongTask {
            op: "rebalance",
            expected: TaskKind::Classification,
        });
    };
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i] == Label::Positive);
    for (rows, class) in [(&pos, "positive"), (&neg, "negative")] {
        if rows.is_empty() {
            return Err(Error::EmptyClass {
                dataset: data.label(),
                class,
            });
        }
    }
    let (p, n) = (pos.len() as u64, neg.len() as u64);
    let (rp, rn) = (u64::from(ratio.positive), u64::from(ratio.negative));
    let mut rng = rng_for(seed);
    let keep = |rows: &[usize], target: u64, rng: &mut crate::seed::Rng| -> Vec<usize> {
        let target = (target as usize).clamp(1, rows.len());
        sample(rng, rows.len(), target).into_iter().map(|i| rows[i]).collect()
    };
    let mut kept: Vec<usize> = if n * rp > p * rn {
        let mut k = keep(&neg, p * rn / rp, &mut rng);
        k.extend_from_slice(&pos);
        k
    } else if p * rn > n * rp {
        let mut k = keep(&pos, n * rp / rn, &mut rng);
        k.extend_from_slice(&neg);
        k
    } else {
        return Ok(data.clone());
    };
    kept.sort_unstable();
    data.subset(&kept)
}
