use std::cmp::Ordering;

use super::ProjectDataset;
use crate::error::{Error, Result};

/// A release tag. Dotted numeric tags (`2.10.1`) compare as integer tuples;
/// anything else compares lexicographically, and the two kinds do not mix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VersionTag {
    Numeric(Vec<u64>),
    Text(String),
}

impl VersionTag {
    pub fn parse(tag: &str) -> VersionTag {
        let parts: Option<Vec<u64>> = tag.trim().split('.').map(|p| p.parse().ok()).collect();
        match parts {
            Some(p) if !p.is_empty() => VersionTag::Numeric(p),
            _ => VersionTag::Text(tag.trim().to_string()),
        }
    }

    pub fn try_cmp(&self, other: &VersionTag) -> Option<Ordering> {
        match (self, other) {
            (VersionTag::Numeric(a), VersionTag::Numeric(b)) => Some(a.cmp(b)),
            (VersionTag::Text(a), VersionTag::Text(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

pub fn compare_versions(a: &str, b: &str) -> Result<Ordering> {
    VersionTag::parse(a)
        .try_cmp(&VersionTag::parse(b))
        .ok_or_else(|| Error::IncomparableVersions(a.to_string(), b.to_string()))
}

/// Sorts oldest to newest; equal tags keep their input order.
pub fn order_versions(datasets: Vec<ProjectDataset>) -> Result<Vec<ProjectDataset>> {
    let mut tagged = Vec::with_capacity(datasets.len());
    for d in datasets {
        let tag = VersionTag::parse(d.version().ok_or_else(|| Error::MissingVersion(d.label()))?);
        tagged.push((tag, d));
    }
    if let Some((first, first_ds)) = tagged.first() {
        for (tag, d) in &tagged[1..] {
            if first.try_cmp(tag).is_none() {
                return Err(Error::IncomparableVersions(
                    first_ds.version().unwrap_or_default().to_string(),
                    d.version().unwrap_or_default().to_string(),
                ));
            }
        }
    }
    // all tags share a kind, so the comparison below is total
    tagged.sort_by(|a, b| a.0.try_cmp(&b.0).unwrap_or(Ordering::Equal));
    Ok(tagged.into_iter().map(|(_, d)| d).collect())
}
