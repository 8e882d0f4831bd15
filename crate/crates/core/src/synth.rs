//! Synthetic communities with a known bellwether, for tests, demos and the
//! CLI fixture.
//!
//! Every project draws its attributes from independent standard normals and
//! labels rows with the same rule, `x0 + 0.5·x1 > 0` (half positive). The
//! planted project keeps those labels. Each noisy project inverts the labels
//! inside one band of ranks of the last attribute, and the bands of
//! different noisy projects barely overlap, so a learner trained on a noisy
//! project copies a corruption no other project shares.

use rand_distr::{Distribution, StandardNormal};

use crate::data::{make_community, Community, FeatureMatrix, Label, ProjectDataset, Target, TaskKind};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};

pub const PLANTED: &str = "planted";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub rows: usize,
    pub attributes: usize,
    pub noisy_projects: usize,
    /// Fraction of rows whose label each noisy project flips.
    pub noise: f64,
    /// Versions per project; with more than one, datasets are tagged "1", "2", ...
    pub versions: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            rows: 200,
            attributes: 5,
            noisy_projects: 3,
            noise: 0.35,
            versions: 1,
            seed: 0,
        }
    }
}

pub fn planted_rule(row: &[f64]) -> bool {
    row[0] + 0.5 * row[1] > 0.0
}

pub fn noisy_name(k: usize) -> String {
    format!("noisy{k}")
}

/// Standard-normal attribute matrix named `x0, x1, ...`.
pub fn normal_features(rows: usize, attributes: usize, seed: u64) -> FeatureMatrix {
    let mut rng = rng_for(seed);
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..attributes).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    FeatureMatrix::new((0..attributes).map(|i| format!("x{i}")).collect(), data).expect("finite normals")
}

/// Ranks rows by column `col` (ascending) and flips the labels of
/// `round(width·n)` consecutive ranks starting at rank `round(start·n)`,
/// wrapping past the largest value to the smallest.
pub fn flip_band(features: &FeatureMatrix, labels: &mut [Label], col: usize, start: f64, width: f64) {
    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| features.get(a, col).total_cmp(&features.get(b, col)).then(a.cmp(&b)));
    let first = (start * n as f64).round() as usize;
    let count = ((width * n as f64).round() as usize).min(n);
    for t in 0..count {
        let i = order[(first + t) % n];
        labels[i] = if labels[i].is_positive() {
            Label::Negative
        } else {
            Label::Positive
        };
    }
}

pub fn planted_community(cfg: &PlantedConfig) -> Result<Community> {
    if cfg.attributes < 3 {
        return Err(Error::Config("planted community needs at least 3 attributes".into()));
    }
    if cfg.rows < 4 || cfg.versions == 0 {
        return Err(Error::Config(
            "planted community needs at least 4 rows and 1 version".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.noise) {
        return Err(Error::OutOfRange {
            what: "noise fraction",
            value: cfg.noise,
        });
    }
    let mut datasets = Vec::new();
    for p in 0..=cfg.noisy_projects {
        let name = if p == 0 { PLANTED.to_string() } else { noisy_name(p) };
        for v in 0..cfg.versions {
            let features = normal_features(cfg.rows, cfg.attributes, derive_seed(cfg.seed, &[p as u64, v as u64]));
            let mut labels: Vec<Label> = features
                .rows()
                .map(|r| {
                    if planted_rule(r) {
                        Label::Positive
                    } else {
                        Label::Negative
                    }
                })
                .collect();
            if p > 0 {
                let start = (p - 1) as f64 / cfg.noisy_projects as f64;
                flip_band(&features, &mut labels, cfg.attributes - 1, start, cfg.noise);
            }
            let version = (cfg.versions > 1).then(|| (v + 1).to_string());
            datasets.push(ProjectDataset::new(
                name.clone(),
                version,
                "bug",
                features,
                Target::Labels(labels),
            )?);
        }
    }
    make_community("synthetic", datasets, TaskKind::Classification)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_balance() {
        let c = planted_community(&PlantedConfig::default()).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.datasets()[0].name(), PLANTED);
        for d in c.datasets() {
            assert_eq!(d.n_rows(), 200);
            let p = d.positives().unwrap();
            assert!((60..=140).contains(&p), "{}: {p}", d.name());
        }
    }

    #[test]
    fn noisy_projects_disagree_with_the_rule_on_the_stated_fraction() {
        let c = planted_community(&PlantedConfig::default()).unwrap();
        for d in c.datasets() {
            let Target::Labels(l) = d.target() else { unreachable!() };
            let wrong = d
                .features()
                .rows()
                .zip(l)
                .filter(|(r, l)| planted_rule(r) != l.is_positive())
                .count();
            let expected = if d.name() == PLANTED { 0 } else { 70 };
            assert_eq!(wrong, expected, "{}", d.name());
        }
    }

    #[test]
    fn versions_are_tagged() {
        let cfg = PlantedConfig {
            versions: 3,
            noisy_projects: 2,
            ..Default::default()
        };
        let c = planted_community(&cfg).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c.datasets()[2].label(), "planted@3");
    }

    #[test]
    fn deterministic_in_seed() {
        let a = planted_community(&PlantedConfig::default()).unwrap();
        let b = planted_community(&PlantedConfig::default()).unwrap();
        assert_eq!(a.datasets(), b.datasets());
        let c = planted_community(&PlantedConfig {
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a.datasets()[0], c.datasets()[0]);
    }
}
