use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{predict, rebalance, train_forest, Forest, ForestParams, Predictions, Ratio};
use crate::data::{FeatureMatrix, ProjectDataset, TaskKind};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Names kept free for transfer learners that ship outside this crate.
pub const RESERVED_STRATEGIES: [&str; 3] = ["tca+", "tnb", "vcb"];

/// A way of turning source data into predictions for a target project.
/// `fit` must be called before `predict`; predictions align with the
/// instance rows.
pub trait TransferStrategy: Send {
    fn name(&self) -> &str;
    fn fit(&mut self, source: &ProjectDataset, seed: u64) -> Result<()>;
    fn predict(&self, instances: &FeatureMatrix) -> Result<Predictions>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub forest: ForestParams,
    pub ratio: Ratio,
}

/// Trains a random forest on the (rebalanced, for classification) source and
/// applies it unchanged to the target.
#[derive(Debug, Clone)]
pub struct DirectStrategy {
    config: LearnerConfig,
    forest: Option<Forest>,
}

impl DirectStrategy {
    pub fn new(config: LearnerConfig) -> Self {
        DirectStrategy { config, forest: None }
    }

    pub fn forest(&self) -> Option<&Forest> {
        self.forest.as_ref()
    }
}

impl TransferStrategy for DirectStrategy {
    fn name(&self) -> &str {
        "direct"
    }

    fn fit(&mut self, source: &ProjectDataset, seed: u64) -> Result<()> {
        let params = ForestParams {
            seed: derive_seed(seed, &[1]),
            ..self.config.forest
        };
        let forest = match source.task() {
            TaskKind::Classification => {
                let balanced = rebalance(source, self.config.ratio, derive_seed(seed, &[0]))?;
                train_forest(&balanced, &params)?
            }
            TaskKind::Regression => train_forest(source, &params)?,
        };
        self.forest = Some(forest);
        Ok(())
    }

    fn predict(&self, instances: &FeatureMatrix) -> Result<Predictions> {
        let forest = self
            .forest
            .as_ref()
            .ok_or_else(|| Error::NotFitted(self.name().into()))?;
        predict(forest, instances)
    }
}

pub type StrategyBuilder = Arc<dyn Fn(&LearnerConfig) -> Box<dyn TransferStrategy> + Send + Sync>;

/// A resolved strategy: builds fresh, unfitted instances on demand.
#[derive(Clone)]
pub struct StrategySpec {
    name: String,
    builder: StrategyBuilder,
    config: LearnerConfig,
}

impl StrategySpec {
    pub fn direct(config: LearnerConfig) -> StrategySpec {
        StrategySpec {
            name: "direct".into(),
            builder: Arc::new(|c| Box::new(DirectStrategy::new(*c))),
            config,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn instantiate(&self) -> Box<dyn TransferStrategy> {
        (self.builder)(&self.config)
    }
}

impl fmt::Debug for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StrategySpec")
            .field("name", &self.name)
            .field("config", &self.config)
            .finish()
    }
}

/// Strategies selectable by name. `direct` is always registered.
#[derive(Clone)]
pub struct StrategyRegistry {
    builders: BTreeMap<String, StrategyBuilder>,
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        let mut r = StrategyRegistry {
            builders: BTreeMap::new(),
        };
        r.register("direct", Arc::new(|c| Box::new(DirectStrategy::new(*c))));
        r
    }
}

impl StrategyRegistry {
    pub fn register(&mut self, name: impl Into<String>, builder: StrategyBuilder) {
        self.builders.insert(name.into().to_lowercase(), builder);
    }

    pub fn names(&self) -> Vec<String> {
        self.builders.keys().cloned().collect()
    }

    pub fn resolve(&self, name: &str, config: LearnerConfig) -> Result<StrategySpec> {
        let key = name.to_lowercase();
        match self.builders.get(&key) {
            Some(b) => Ok(StrategySpec {
                name: key,
                builder: b.clone(),
                config,
            }),
            None if RESERVED_STRATEGIES.contains(&key.as_str()) => Err(Error::ReservedStrategy(key)),
            None => Err(Error::UnknownStrategy {
                name: name.to_string(),
                registered: self.names(),
            }),
        }
    }
}
