use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use super::{DecisionTree, ForestParams};
use crate::data::{FeatureMatrix, Label, ProjectDataset, Target, TaskKind};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingMeta {
    pub n_rows: usize,
    pub positives: Option<usize>,
    pub params: ForestParams,
}

/// Bagged ensemble of [`DecisionTree`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<DecisionTree>,
    task: TaskKind,
    attributes: Vec<String>,
    meta: TrainingMeta,
}

impl Forest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Labels(Vec<Label>),
    Values(Vec<f64>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Labels(l) => l.len(),
            Predictions::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Trains `params.n_trees` trees, each on a bootstrap sample of the rows.
/// Tree `i` draws from a generator seeded by `(params.seed, i)`, so the
/// forest is identical however the trees are scheduled.
pub fn train_forest(data: &ProjectDataset, params: &ForestParams) -> Result<Forest> {
    params.validate()?;
    let n = data.n_rows();
    if n < params.min_samples_split {
        return Err(Error::TooFewRows {
            needed: params.min_samples_split,
            found: n,
        });
    }
    let y: Vec<f64> = match data.target() {
        Target::Labels(l) => {
            if l.iter().all(|x| *x == l[0]) {
                return Err(Error::SingleClass);
            }
            l.iter().map(|x| if x.is_positive() { 1.0 } else { 0.0 }).collect()
        }
        Target::Values(v) => v.clone(),
    };
    let task = data.task();
    let x = data.features();
    let grow = |i: usize| {
        let mut rng = rng_for(derive_seed(params.seed, &[i as u64]));
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        DecisionTree::fit(task, x, &y, rows, params, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let trees: Vec<DecisionTree> = (0..params.n_trees).into_par_iter().map(grow).collect();
    #[cfg(not(feature = "parallel"))]
    let trees: Vec<DecisionTree> = (0..params.n_trees).map(grow).collect();

    Ok(Forest {
        trees,
        task,
        attributes: data.attributes().to_vec(),
        meta: TrainingMeta {
            n_rows: n,
            positives: data.positives(),
            params: *params,
        },
    })
}

/// Majority vote (ties go to negative) for classification, mean of tree
/// outputs for regression.
pub fn predict(forest: &Forest, instances: &FeatureMatrix) -> Result<Predictions> {
    if instances.attributes() != forest.attributes.as_slice() {
        return Err(Error::SchemaMismatch {
            dataset: "instances".into(),
            attribute: crate::data::first_difference(&forest.attributes, instances.attributes()),
        });
    }
    let n_trees = forest.trees.len();
    Ok(match forest.task {
        TaskKind::Classification => Predictions::Labels(
            instances
                .rows()
                .map(|row| {
                    let pos = forest
                        .trees
                        .iter()
                        .filter(|t| t.predict_label(row) == Label::Positive)
                        .count();
                    if 2 * pos > n_trees {
                        Label::Positive
                    } else {
                        Label::Negative
                    }
                })
                .collect(),
        ),
        TaskKind::Regression => Predictions::Values(
            instances
                .rows()
                .map(|row| forest.trees.iter().map(|t| t.predict_value(row)).sum::<f64>() / n_trees as f64)
                .collect(),
        ),
    })
}

/// Attributes ranked by their share of the total impurity decrease (Gini for
/// classification, squared error for regression) over all trees. Attributes
/// that never split are omitted; a forest without splits gives an empty list.
pub fn feature_importance(forest: &Forest) -> Vec<(String, f64)> {
    let mut totals = vec![0.0; forest.attributes.len()];
    for t in &forest.trees {
        for (acc, g) in totals.iter_mut().zip(t.gains()) {
            *acc += g;
        }
    }
    let sum: f64 = totals.iter().sum();
    if sum <= 0.0 {
        return Vec::new();
    }
    let mut ranked: Vec<(String, f64)> = forest
        .attributes
        .iter()
        .zip(&totals)
        .filter(|(_, &g)| g > 0.0)
        .map(|(a, g)| (a.clone(), g / sum))
        .collect();
    // stable: equal scores keep attribute order
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked
}
