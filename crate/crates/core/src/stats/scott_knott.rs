use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{a12_effect, bootstrap_test, SampleSet, TestConfig};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankGroup {
    pub rank: usize,
    pub members: Vec<String>,
}

/// Treatments partitioned into ranks, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedGroups {
    pub direction: Direction,
    pub groups: Vec<RankGroup>,
}

impl RankedGroups {
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.groups
            .iter()
            .find(|g| g.members.iter().any(|m| m == name))
            .map(|g| g.rank)
    }

    pub fn top(&self) -> &[String] {
        self.groups.first().map_or(&[], |g| g.members.as_slice())
    }

    /// True when the ranking found at least one significant split.
    pub fn separated(&self) -> bool {
        self.groups.len() > 1
    }
}

/// `(ms/ls)·(μm − μl)² + (ns/ls)·(μn − μl)²` for `m = values[..split]`,
/// `n = values[split..]`.
pub fn expected_delta(values: &[f64], split: usize) -> Result<f64> {
    if split == 0 || split >= values.len() {
        return Err(Error::OutOfRange {
            what: "split point",
            value: split as f64,
        });
    }
    let (m, n) = values.split_at(split);
    let sum_m: f64 = m.iter().sum();
    let sum_n: f64 = n.iter().sum();
    Ok(delta_from_sums(sum_m, m.len(), sum_n, n.len()))
}

fn delta_from_sums(sum_m: f64, len_m: usize, sum_n: f64, len_n: usize) -> f64 {
    let len_l = (len_m + len_n) as f64;
    let mu_l = (sum_m + sum_n) / len_l;
    let mu_m = sum_m / len_m as f64;
    let mu_n = sum_n / len_n as f64;
    (len_m as f64 / len_l) * (mu_m - mu_l).abs().powi(2) + (len_n as f64 / len_l) * (mu_n - mu_l).abs().powi(2)
}

/// Top-down Scott-Knott clustering.
///
/// Treatments are sorted by median (best first, ties by name), then the list
/// is cut where the expected squared deviation of the two halves' means is
/// largest. A cut is kept only when the bootstrap test finds the pooled halves
/// significantly different and their A12 effect reaches the threshold; both
/// halves are then split again.
pub fn scott_knott(samples: &[SampleSet], cfg: &TestConfig, direction: Direction) -> Result<RankedGroups> {
    if samples.is_empty() {
        return Err(Error::Empty("Scott-Knott input"));
    }
    cfg.validate()?;
    let medians: Vec<f64> = samples.iter().map(SampleSet::median).collect();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| {
        let by_median = match direction {
            Direction::HigherIsBetter => medians[b].total_cmp(&medians[a]),
            Direction::LowerIsBetter => medians[a].total_cmp(&medians[b]),
        };
        by_median.then_with(|| samples[a].name.cmp(&samples[b].name))
    });
    let sorted: Vec<&SampleSet> = order.iter().map(|&i| &samples[i]).collect();

    let mut cuts = Vec::new();
    split(&sorted, 0, sorted.len(), cfg, &mut cuts)?;
    cuts.sort_unstable();

    let mut groups = Vec::new();
    let mut start = 0;
    for end in cuts.into_iter().chain(std::iter::once(sorted.len())) {
        groups.push(RankGroup {
            rank: groups.len() + 1,
            members: sorted[start..end].iter().map(|s| s.name.clone()).collect(),
        });
        start = end;
    }
    Ok(RankedGroups { direction, groups })
}

fn split(sorted: &[&SampleSet], lo: usize, hi: usize, cfg: &TestConfig, cuts: &mut Vec<usize>) -> Result<()> {
    if hi - lo < 2 {
        return Ok(());
    }
    let sums: Vec<f64> = sorted[lo..hi].iter().map(|s| s.values.iter().sum()).collect();
    let lens: Vec<usize> = sorted[lo..hi].iter().map(|s| s.values.len()).collect();
    let total_sum: f64 = sums.iter().sum();
    let total_len: usize = lens.iter().sum();

    let mut best: Option<(usize, f64)> = None;
    let (mut sum_m, mut len_m) = (0.0, 0usize);
    for cut in 1..(hi - lo) {
        sum_m += sums[cut - 1];
        len_m += lens[cut - 1];
        let delta = delta_from_sums(sum_m, len_m, total_sum - sum_m, total_len - len_m);
        if best.is_none_or(|(_, d)| delta.total_cmp(&d) == Ordering::Greater) {
            best = Some((cut, delta));
        }
    }
    let Some((cut, _)) = best else { return Ok(()) };
    let cut = lo + cut;

    let pool = |range: std::ops::Range<usize>| -> Vec<f64> {
        sorted[range].iter().flat_map(|s| s.values.iter().copied()).collect()
    };
    let left = pool(lo..cut);
    let right = pool(cut..hi);
    if left.len() < 2 || right.len() < 2 {
        return Ok(());
    }
    let test_cfg = cfg.with_seed(derive_seed(cfg.seed, &[lo as u64, hi as u64]));
    let differs =
        bootstrap_test(&left, &right, &test_cfg)?.significant && a12_effect(&left, &right)? >= cfg.a12_threshold;
    if differs {
        cuts.push(cut);
        split(sorted, lo, cut, cfg, cuts)?;
        split(sorted, cut, hi, cfg, cuts)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::seed::rng_for;

    fn set(name: &str, values: Vec<f64>) -> SampleSet {
        SampleSet::new(name, values).unwrap()
    }

    fn normal(mu: f64, sd: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_for(seed);
        let d = Normal::new(mu, sd).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn expected_delta_by_hand() {
        let l = [1.0, 1.0, 5.0, 5.0];
        // (2/4)·(1−3)² + (2/4)·(5−3)²
        assert_eq!(expected_delta(&l, 2).unwrap(), 4.0);
        // every split, against a direct evaluation
        let all: Vec<f64> = (1..4).map(|s| expected_delta(&l, s).unwrap()).collect();
        let oracle = |s: usize| {
            let (m, n) = l.split_at(s);
            let mu = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let ml = mu(&l);
            m.len() as f64 / 4.0 * (mu(m) - ml).powi(2) + n.len() as f64 / 4.0 * (mu(n) - ml).powi(2)
        };
        for (i, d) in all.iter().enumerate() {
            assert!((d - oracle(i + 1)).abs() < 1e-12);
        }
        assert!(all[1] > all[0] && all[1] > all[2]);
        for s in 1..5 {
            assert_eq!(expected_delta(&[2.0; 5], s).unwrap(), 0.0);
        }
        assert!(expected_delta(&l, 0).is_err());
        assert!(expected_delta(&l, 4).is_err());
    }

    #[test]
    fn indistinguishable_sets_share_rank() {
        let r = scott_knott(
            &[set("A", vec![5.0; 30]), set("B", vec![5.0; 30])],
            &TestConfig::default(),
            Direction::HigherIsBetter,
        )
        .unwrap();
        assert_eq!(r.groups.len(), 1);
        assert_eq!(r.groups[0].members, ["A", "B"]);
    }

    #[test]
    fn separated_sets_are_ranked() {
        let a = set("A", normal(10.0, 0.01, 30, 1));
        let b = set("B", normal(0.0, 0.01, 30, 2));
        let r = scott_knott(
            &[b.clone(), a.clone()],
            &TestConfig::default(),
            Direction::HigherIsBetter,
        )
        .unwrap();
        assert_eq!(r.rank_of("A"), Some(1));
        assert_eq!(r.rank_of("B"), Some(2));
        let r = scott_knott(&[b, a], &TestConfig::default(), Direction::LowerIsBetter).unwrap();
        assert_eq!(r.top(), ["B"]);
    }

    #[test]
    fn three_levels() {
        let sets = [
            set("lo", normal(0.2, 0.02, 30, 3)),
            set("mid", normal(0.5, 0.02, 30, 4)),
            set("mid2", normal(0.5, 0.02, 30, 5)),
            set("hi", normal(0.8, 0.02, 30, 6)),
        ];
        let r = scott_knott(&sets, &TestConfig::default(), Direction::HigherIsBetter).unwrap();
        assert_eq!(r.groups.len(), 3);
        assert_eq!(r.top(), ["hi"]);
        assert_eq!(r.rank_of("mid"), r.rank_of("mid2"));
        assert_eq!(r.rank_of("lo"), Some(3));
    }

    #[test]
    fn single_and_empty_input() {
        let r = scott_knott(
            &[set("only", vec![1.0])],
            &TestConfig::default(),
            Direction::HigherIsBetter,
        )
        .unwrap();
        assert_eq!(r.groups.len(), 1);
        assert!(scott_knott(&[], &TestConfig::default(), Direction::HigherIsBetter).is_err());
    }

    fn sets_strategy() -> impl Strategy<Value = Vec<SampleSet>> {
        proptest::collection::vec((0.0f64..1.0, 0.01f64..0.3, any::<u64>()), 1..6).prop_map(|specs| {
            specs
                .into_iter()
                .enumerate()
                .map(|(i, (mu, sd, seed))| set(&format!("s{i}"), normal(mu, sd, 10, seed)))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ranks_partition_the_input(sets in sets_strategy()) {
            let r = scott_knott(&sets, &TestConfig::default(), Direction::HigherIsBetter).unwrap();
            let mut names: Vec<String> = r.groups.iter().flat_map(|g| g.members.clone()).collect();
            for (i, g) in r.groups.iter().enumerate() {
                prop_assert_eq!(g.rank, i + 1);
                prop_assert!(!g.members.is_empty());
            }
            names.sort();
            let mut expected: Vec<String> = sets.iter().map(|s| s.name.clone()).collect();
            expected.sort();
            prop_assert_eq!(names, expected);
        }

        #[test]
        fn copying_a_set_keeps_relative_order(sets in sets_strategy(), pick in any::<prop::sample::Index>()) {
            let cfg = TestConfig::default();
            let before = scott_knott(&sets, &cfg, Direction::HigherIsBetter).unwrap();
            let mut extended = sets.clone();
            let mut copy = sets[pick.index(sets.len())].clone();
            copy.name = "zz-copy".into();
            extended.push(copy);
            let after = scott_knott(&extended, &cfg, Direction::HigherIsBetter).unwrap();
            for a in &sets {
                for b in &sets {
                    let lt_before = before.rank_of(&a.name) < before.rank_of(&b.name);
                    let gt_after = after.rank_of(&a.name) > after.rank_of(&b.name);
                    prop_assert!(!(lt_before && gt_after), "{} vs {}", a.name, b.name);
                }
            }
        }
    }
}
