use std::collections::HashMap;

use super::{first_difference, PositiveRule, ProjectDataset, TaskKind};
use crate::error::{Error, Result};

/// Datasets that share one attribute schema and one task.
#[derive(Debug, Clone)]
pub struct Community {
    pub name: String,
    pub task: TaskKind,
    pub positive_rule: Option<PositiveRule>,
    datasets: Vec<ProjectDataset>,
}

impl Community {
    pub fn datasets(&self) -> &[ProjectDataset] {
        &self.datasets
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    pub fn attributes(&self) -> &[String] {
        self.datasets[0].attributes()
    }

    pub fn find(&self, label: &str) -> Option<&ProjectDataset> {
        self.datasets.iter().find(|d| d.label() == label).or_else(|| {
            let mut by_name = self.datasets.iter().filter(|d| d.name() == label);
            match (by_name.next(), by_name.next()) {
                (Some(d), None) => Some(d),
                _ => None,
            }
        })
    }

    pub fn get(&self, label: &str) -> Result<&ProjectDataset> {
        self.find(label).ok_or_else(|| Error::UnknownDataset(label.to_string()))
    }

    pub fn with_positive_rule(mut self, rule: Option<PositiveRule>) -> Self {
        self.positive_rule = rule;
        self
    }
}

/// Builds a community, checking that every member has the same attribute
/// names (as a multiset) and the same task. Members whose columns are a
/// permutation of the first member's are reordered to match it.
pub fn make_community(name: impl Into<String>, datasets: Vec<ProjectDataset>, task: TaskKind) -> Result<Community> {
    let Some(first) = datasets.first() else {
        return Err(Error::TooFewDatasets {
            what: "a community",
            needed: 1,
            found: 0,
        });
    };
    let reference: Vec<String> = first.attributes().to_vec();
    let reference_counts = counts(&reference);
    let mut members = Vec::with_capacity(datasets.len());
    for d in datasets {
        if d.task() != task {
            return Err(Error::MixedTask {
                dataset: d.label(),
                expected: task,
                found: d.task(),
            });
        }
        if d.attributes() == reference.as_slice() {
            members.push(d);
        } else if counts(d.attributes()) == reference_counts {
            members.push(d.reorder_columns(&reference)?);
        } else {
            return Err(Error::SchemaMismatch {
                dataset: d.label(),
                attribute: first_difference(&reference, d.attributes()),
            });
        }
    }
    Ok(Community {
        name: name.into(),
        task,
        positive_rule: None,
        datasets: members,
    })
}

fn counts(names: &[String]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for n in names {
        *m.entry(n.as_str()).or_insert(0) += 1;
    }
    m
}
