//! Project datasets, communities and the files they are loaded from.

mod community;
mod io;
mod manifest;
mod rule;
mod version;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use community::{make_community, Community};
pub use io::{load_csv, write_csv, LoadOptions};
pub use manifest::{balance_text, validate_manifest, DatasetDiagnostic, Manifest, ManifestEntry, ValidationReport};
pub use rule::{CmpOp, PositiveRule};
pub use version::{compare_versions, order_versions, VersionTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// Per-row dependent variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Labels(Vec<Label>),
    Values(Vec<f64>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Labels(l) => l.len(),
            Target::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> TaskKind {
        match self {
            Target::Labels(_) => TaskKind::Classification,
            Target::Values(_) => TaskKind::Regression,
        }
    }

    fn select(&self, indices: &[usize]) -> Target {
        match self {
            Target::Labels(l) => Target::Labels(indices.iter().map(|&i| l[i]).collect()),
            Target::Values(v) => Target::Values(indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Row-major numeric matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    attributes: Vec<String>,
    values: Vec<f64>,
    n_rows: usize,
}

impl FeatureMatrix {
    pub fn new(attributes: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_cols = attributes.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::InvalidDataset {
                    dataset: String::new(),
                    message: format!("row {i} has {} values, expected {n_cols}", row.len()),
                });
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            attributes,
            values,
            n_rows: rows.len(),
        })
    }

    pub(crate) fn from_flat(attributes: Vec<String>, values: Vec<f64>) -> Self {
        let n_cols = attributes.len().max(1);
        let n_rows = values.len() / n_cols;
        Self {
            attributes,
            values,
            n_rows,
        }
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.attributes.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_cols();
        &self.values[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.attributes.len() + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            attributes: self.attributes.clone(),
            values,
            n_rows: indices.len(),
        }
    }

    fn reorder(&self, order: &[usize], names: Vec<String>) -> FeatureMatrix {
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            values.extend(order.iter().map(|&c| row[c]));
        }
        FeatureMatrix {
            attributes: names,
            values,
            n_rows: self.n_rows,
        }
    }
}

/// One project's instances together with their class column.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectDataset {
    name: String,
    version: Option<String>,
    class_name: String,
    features: FeatureMatrix,
    target: Target,
}

impl ProjectDataset {
    pub fn new(
        name: impl Into<String>,
        version: Option<String>,
        class_name: impl Into<String>,
        features: FeatureMatrix,
        target: Target,
    ) -> Result<Self> {
        let name = name.into();
        if features.n_rows() == 0 {
            return Err(Error::EmptyDataset(name));
        }
        if features.n_rows() != target.len() {
            return Err(Error::InvalidDataset {
                dataset: name,
                message: format!("{} feature rows but {} class values", features.n_rows(), target.len()),
            });
        }
        let mut seen = HashSet::new();
        for a in features.attributes() {
            if !seen.insert(a.as_str()) {
                return Err(Error::DuplicateAttribute {
                    dataset: name,
                    attribute: a.clone(),
                });
            }
        }
        if let Target::Values(v) = &target {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidDataset {
                    dataset: name,
                    message: format!("class value in row {i} is not finite"),
                });
            }
        }
        if features.values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset {
                dataset: name,
                message: "feature values must be finite".into(),
            });
        }
        Ok(Self {
            name,
            version,
            class_name: class_name.into(),
            features,
            target,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    /// Display identifier: `name` or `name@version`.
    pub fn label(&self) -> String {
        match &self.version {
            Some(v) => format!("{}@{}", self.name, v),
            None => self.name.clone(),
        }
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn attributes(&self) -> &[String] {
        self.features.attributes()
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn task(&self) -> TaskKind {
        self.target.task()
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    /// Number of positive rows; `None` for regression data.
    pub fn positives(&self) -> Option<usize> {
        match &self.target {
            Target::Labels(l) => Some(l.iter().filter(|l| l.is_positive()).count()),
            Target::Values(_) => None,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>, version: Option<String>) -> Self {
        self.name = name.into();
        self.version = version;
        self
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<ProjectDataset> {
        ProjectDataset::new(
            self.name.clone(),
            self.version.clone(),
            self.class_name.clone(),
            self.features.select(indices),
            self.target.select(indices),
        )
    }

    /// Same rows with columns permuted into `names` order. `names` must be a
    /// permutation of the current attribute list.
    pub fn reorder_columns(&self, names: &[String]) -> Result<ProjectDataset> {
        let order = names
            .iter()
            .map(|n| {
                self.attributes()
                    .iter()
                    .position(|a| a == n)
                    .ok_or_else(|| Error::SchemaMismatch {
                        dataset: self.label(),
                        attribute: n.clone(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectDataset {
            features: self.features.reorder(&order, names.to_vec()),
            ..self.clone()
        })
    }

    /// Stacks the rows of several same-schema datasets. The result takes the
    /// name of the first part and carries no version.
    pub fn concat(name: impl Into<String>, parts: &[&ProjectDataset]) -> Result<ProjectDataset> {
        let first = parts.first().ok_or(Error::Empty("dataset list"))?;
        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut reals = Vec::new();
        for p in parts {
            ensure_same_schema(first, p)?;
            if p.task() != first.task() {
                return Err(Error::MixedTask {
                    dataset: p.label(),
                    expected: first.task(),
                    found: p.task(),
                });
            }
            values.extend_from_slice(&p.features.values);
            match &p.target {
                Target::Labels(l) => labels.extend_from_slice(l),
                Target::Values(v) => reals.extend_from_slice(v),
            }
        }
        let target = match first.task() {
            TaskKind::Classification => Target::Labels(labels),
            TaskKind::Regression => Target::Values(reals),
        };
        ProjectDataset::new(
            name,
            None,
            first.class_name.clone(),
            FeatureMatrix::from_flat(first.attributes().to_vec(), values),
            target,
        )
    }

    /// Number of rows that exactly repeat an earlier row (features and class).
    pub fn duplicate_rows(&self) -> usize {
        let mut seen = HashSet::new();
        let mut dups = 0;
        for i in 0..self.n_rows() {
            let mut key: Vec<u64> = self.features.row(i).iter().map(|x| x.to_bits()).collect();
            key.push(match &self.target {
                Target::Labels(l) => l[i] as u64,
                Target::Values(v) => v[i].to_bits(),
            });
            if !seen.insert(key) {
                dups += 1;
            }
        }
        dups
    }

    pub fn constant_columns(&self) -> Vec<String> {
        (0..self.features.n_cols())
            .filter(|&c| {
                let first = self.features.get(0, c);
                (1..self.n_rows()).all(|r| self.features.get(r, c) == first)
            })
            .map(|c| self.attributes()[c].clone())
            .collect()
    }
}

/// Errors unless both datasets carry the same attribute names in the same order.
pub fn ensure_same_schema(reference: &ProjectDataset, other: &ProjectDataset) -> Result<()> {
    if reference.attributes() == other.attributes() {
        return Ok(());
    }
    Err(Error::SchemaMismatch {
        dataset: other.label(),
        attribute: first_difference(reference.attributes(), other.attributes()),
    })
}

/// Names the attribute that best explains why two schemas differ: an extra
/// attribute in `other`, else one missing from it, else the first position
/// where the order differs.
pub(crate) fn first_difference(reference: &[String], other: &[String]) -> String {
    let ref_set: HashSet<&str> = reference.iter().map(String::as_str).collect();
    let other_set: HashSet<&str> = other.iter().map(String::as_str).collect();
    if let Some(extra) = other.iter().find(|a| !ref_set.contains(a.as_str())) {
        return extra.clone();
    }
    if let Some(missing) = reference.iter().find(|a| !other_set.contains(a.as_str())) {
        return missing.clone();
    }
    reference
        .iter()
        .zip(other)
        .find(|(a, b)| a != b)
        .map(|(_, b)| b.clone())
        .unwrap_or_else(|| other.last().cloned().unwrap_or_default())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn classification(name: &str, attrs: &[&str], rows: Vec<Vec<f64>>, labels: &[bool]) -> ProjectDataset {
        let attributes = attrs.iter().map(|s| s.to_string()).collect();
        ProjectDataset::new(
            name,
            None,
            "bug",
            FeatureMatrix::new(attributes, rows).unwrap(),
            Target::Labels(
                labels
                    .iter()
                    .map(|&b| if b { Label::Positive } else { Label::Negative })
                    .collect(),
            ),
        )
        .unwrap()
    }

    pub fn regression(name: &str, attrs: &[&str], rows: Vec<Vec<f64>>, values: &[f64]) -> ProjectDataset {
        let attributes = attrs.iter().map(|s| s.to_string()).collect();
        ProjectDataset::new(
            name,
            None,
            "effort",
            FeatureMatrix::new(attributes, rows).unwrap(),
            Target::Values(values.to_vec()),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn rejects_duplicate_attributes() {
        let fm = FeatureMatrix::new(vec!["a".into(), "a".into()], vec![vec![1.0, 2.0]]).unwrap();
        let err = ProjectDataset::new("d", None, "bug", fm, Target::Labels(vec![Label::Positive]));
        assert!(matches!(err, Err(Error::DuplicateAttribute { .. })));
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        let fm = FeatureMatrix::new(vec!["a".into()], vec![]).unwrap();
        assert!(matches!(
            ProjectDataset::new("d", None, "y", fm, Target::Values(vec![])),
            Err(Error::EmptyDataset(_))
        ));
        let fm = FeatureMatrix::new(vec!["a".into()], vec![vec![1.0]]).unwrap();
        assert!(ProjectDataset::new("d", None, "y", fm, Target::Values(vec![f64::NAN])).is_err());
    }

    #[test]
    fn concat_and_reorder() {
        let a = classification("a", &["x", "y"], vec![vec![1.0, 2.0]], &[true]);
        let b = classification("b", &["x", "y"], vec![vec![3.0, 4.0]], &[false]);
        let c = ProjectDataset::concat("a", &[&a, &b]).unwrap();
        assert_eq!(c.n_rows(), 2);
        assert_eq!(c.features().row(1), &[3.0, 4.0]);
        assert_eq!(c.positives(), Some(1));

        let r = c.reorder_columns(&["y".into(), "x".into()]).unwrap();
        assert_eq!(r.features().row(0), &[2.0, 1.0]);
    }

    #[test]
    fn counts_duplicates_and_constants() {
        let d = classification(
            "d",
            &["x", "k"],
            vec![vec![1.0, 5.0], vec![1.0, 5.0], vec![2.0, 5.0]],
            &[true, true, false],
        );
        assert_eq!(d.duplicate_rows(), 1);
        assert_eq!(d.constant_columns(), vec!["k".to_string()]);
    }
}
