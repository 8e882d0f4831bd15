use serde::Serialize;

use super::{par_map, rank_holdouts, transfer, PairGrid, Protocol, Verdict};
use crate::data::{order_versions, Community, ProjectDataset};
use crate::error::{Error, Result};
use crate::learners::{feature_importance, DirectStrategy, LearnerConfig, StrategySpec, TransferStrategy};
use crate::seed::derive_seed;
use crate::stats::{scott_knott, Direction, RankedGroups, SampleSet, Summary, TestConfig};

/// Per-method samples for one comparison context (typically a target
/// project).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Context {
    pub id: String,
    pub methods: Vec<SampleSet>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Wtl {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl Wtl {
    pub fn total(&self) -> usize {
        self.wins + self.ties + self.losses
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodWtl {
    pub method: String,
    #[serde(flatten)]
    pub wtl: Wtl,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextRanking {
    pub id: String,
    pub ranking: RankedGroups,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WtlTable {
    pub methods: Vec<MethodWtl>,
    pub contexts: Vec<ContextRanking>,
}

impl WtlTable {
    pub fn get(&self, method: &str) -> Option<Wtl> {
        self.methods.iter().find(|m| m.method == method).map(|m| m.wtl)
    }
}

/// Ranks the methods in every context. A method wins a context when it is
/// alone in rank 1, ties when it shares rank 1 and loses otherwise.
pub fn win_tie_loss(contexts: &[Context], cfg: &TestConfig, direction: Direction) -> Result<WtlTable> {
    let first = contexts.first().ok_or(Error::Empty("context list"))?;
    let names: Vec<String> = first.methods.iter().map(|m| m.name.clone()).collect();
    let mut sorted_names = names.clone();
    sorted_names.sort();
    if sorted_names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InconsistentMethods(first.id.clone()));
    }
    let mut methods: Vec<MethodWtl> = names
        .iter()
        .map(|m| MethodWtl {
            method: m.clone(),
            wtl: Wtl::default(),
        })
        .collect();
    let mut rankings = Vec::with_capacity(contexts.len());
    for (ci, c) in contexts.iter().enumerate() {
        let mut these: Vec<String> = c.methods.iter().map(|m| m.name.clone()).collect();
        these.sort();
        if these != sorted_names {
            return Err(Error::InconsistentMethods(c.id.clone()));
        }
        let ranking = scott_knott(
            &c.methods,
            &cfg.with_seed(derive_seed(cfg.seed, &[ci as u64])),
            direction,
        )?;
        let top = ranking.top();
        for m in &mut methods {
            if !top.contains(&m.method) {
                m.wtl.losses += 1;
            } else if top.len() == 1 {
                m.wtl.wins += 1;
            } else {
                m.wtl.ties += 1;
            }
        }
        rankings.push(ContextRanking {
            id: c.id.clone(),
            ranking,
        });
    }
    Ok(WtlTable {
        methods,
        contexts: rankings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WithinWinner {
    Bellwether,
    Local,
    Tie,
    /// Discovery on the other projects found no bellwether.
    NoBellwether,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WithinRow {
    pub project: String,
    /// Version predicted by both arms.
    pub holdout: String,
    /// The same project's previous version, used by the local arm.
    pub local_source: String,
    pub bellwether_source: Option<String>,
    pub bellwether_scores: Option<SampleSet>,
    pub local_scores: SampleSet,
    pub bellwether_summary: Option<Summary>,
    pub local_summary: Summary,
    pub ranking: Option<RankedGroups>,
    pub winner: WithinWinner,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WithinReport {
    pub community: String,
    pub rows: Vec<WithinRow>,
}

/// Groups datasets by project name and orders each project's versions.
fn projects(community: &Community) -> Result<Vec<(String, Vec<ProjectDataset>)>> {
    let mut groups: Vec<(String, Vec<ProjectDataset>)> = Vec::new();
    for d in community.datasets() {
        match groups.iter_mut().find(|(n, _)| n == d.name()) {
            Some((_, v)) => v.push(d.clone()),
            None => groups.push((d.name().to_string(), vec![d.clone()])),
        }
    }
    groups
        .into_iter()
        .map(|(name, versions)| {
            if versions.len() < 2 {
                return Err(Error::UnversionedProject(name));
            }
            Ok((name, order_versions(versions)?))
        })
        .collect()
}

/// For each project, predicts its newest version twice: once from the
/// bellwether that discovery picks among the other projects' previous
/// versions, once from the project's own previous version. Passing
/// `bellwether` (a project name) skips discovery.
pub fn compare_within_vs_bellwether(
    community: &Community,
    strategy: &StrategySpec,
    protocol: &Protocol,
    bellwether: Option<&str>,
) -> Result<WithinReport> {
    protocol.validate()?;
    let projects = projects(community)?;
    let previous: Vec<ProjectDataset> = projects.iter().map(|(_, v)| v[v.len() - 2].clone()).collect();
    let forced = match bellwether {
        Some(name) => Some(
            projects
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| Error::UnknownDataset(name.to_string()))?,
        ),
        None => None,
    };
    let grid = match forced {
        Some(_) => None,
        None => Some(PairGrid::compute(
            &previous,
            strategy,
            protocol.repeats,
            derive_seed(protocol.seed, &[0]),
        )?),
    };

    let mut rows = Vec::with_capacity(projects.len());
    for (p, (name, versions)) in projects.iter().enumerate() {
        let latest = &versions[versions.len() - 1];
        let local_src = &previous[p];
        let chosen = match (forced, &grid) {
            (Some(b), _) => Some(b),
            (None, Some(grid)) => {
                let others: Vec<usize> = (0..projects.len()).filter(|&i| i != p).collect();
                let report = rank_holdouts(grid, &others, &community.name, protocol)?;
                match report.verdict {
                    Verdict::Found => report
                        .leading_bellwether()
                        .and_then(|l| previous.iter().position(|d| d.label() == l)),
                    Verdict::NotFound => None,
                }
            }
            (None, None) => unreachable!(),
        };
        let seed = derive_seed(protocol.seed, &[1, p as u64]);
        let local = transfer(local_src, latest, strategy, protocol.repeats, seed)?;
        let local_scores = SampleSet::new(format!("local:{}", local_src.label()), local.scores.values)?;
        let row = match chosen {
            None => WithinRow {
                project: name.clone(),
                holdout: latest.label(),
                local_source: local_src.label(),
                bellwether_source: None,
                bellwether_scores: None,
                bellwether_summary: None,
                local_summary: local_scores.summary(),
                local_scores,
                ranking: None,
                winner: WithinWinner::NoBellwether,
            },
            Some(b) => {
                let bw = transfer(&previous[b], latest, strategy, protocol.repeats, seed)?;
                let bw_scores = SampleSet::new(format!("bellwether:{}", previous[b].label()), bw.scores.values)?;
                let ranking = scott_knott(
                    &[bw_scores.clone(), local_scores.clone()],
                    &protocol.ranking_config(&[1, p as u64]),
                    Direction::HigherIsBetter,
                )?;
                let winner = if !ranking.separated() {
                    WithinWinner::Tie
                } else if ranking.top()[0] == bw_scores.name {
                    WithinWinner::Bellwether
                } else {
                    WithinWinner::Local
                };
                WithinRow {
                    project: name.clone(),
                    holdout: latest.label(),
                    local_source: local_src.label(),
                    bellwether_source: Some(previous[b].label()),
                    bellwether_summary: Some(bw_scores.summary()),
                    bellwether_scores: Some(bw_scores),
                    local_summary: local_scores.summary(),
                    local_scores,
                    ranking: Some(ranking),
                    winner,
                }
            }
        };
        rows.push(row);
    }
    Ok(WithinReport {
        community: community.name.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionInfo {
    pub name: String,
    pub versions: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSufficiency {
    pub target: String,
    pub ranking: RankedGroups,
    pub summaries: Vec<(String, Summary)>,
    /// Smallest union that shares rank 1.
    pub sufficient: String,
    /// The newest version alone ranks with the largest union.
    pub latest_matches_largest: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementalReport {
    pub unions: Vec<UnionInfo>,
    pub per_target: Vec<TargetSufficiency>,
    /// Targets where the newest version alone ranks with the largest union.
    pub latest_sufficient_for: usize,
}

/// Trains on growing unions of a project's versions (newest first) and, for
/// each target, finds the smallest union statistically as good as the best.
pub fn incremental_sufficiency(
    versions_newest_first: &[ProjectDataset],
    targets: &[ProjectDataset],
    strategy: &StrategySpec,
    protocol: &Protocol,
) -> Result<IncrementalReport> {
    protocol.validate()?;
    if versions_newest_first.len() < 2 {
        return Err(Error::TooFewDatasets {
            what: "an incremental study",
            needed: 2,
            found: versions_newest_first.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::Empty("target list"));
    }
    let mut unions = Vec::new();
    let mut infos = Vec::new();
    for k in 1..=versions_newest_first.len() {
        let parts: Vec<&ProjectDataset> = versions_newest_first[..k].iter().collect();
        let labels: Vec<String> = parts.iter().map(|d| d.label()).collect();
        let name = labels.join("+");
        let union = ProjectDataset::concat(name.clone(), &parts)?;
        infos.push(UnionInfo {
            name,
            versions: labels,
            rows: union.n_rows(),
        });
        unions.push(union);
    }

    let mut per_target = Vec::with_capacity(targets.len());
    for (ti, target) in targets.iter().enumerate() {
        let seed = derive_seed(protocol.seed, &[ti as u64]);
        let samples: Vec<SampleSet> = unions
            .iter()
            .map(|u| transfer(u, target, strategy, protocol.repeats, seed).map(|e| e.scores))
            .collect::<Result<_>>()?;
        let ranking = scott_knott(
            &samples,
            &protocol.ranking_config(&[ti as u64]),
            Direction::HigherIsBetter,
        )?;
        let top = ranking.top();
        let sufficient = infos
            .iter()
            .find(|u| top.contains(&u.name))
            .map(|u| u.name.clone())
            .expect("rank 1 holds some union");
        let first = &infos[0].name;
        let last = &infos[infos.len() - 1].name;
        per_target.push(TargetSufficiency {
            target: target.label(),
            latest_matches_largest: ranking.rank_of(first) == ranking.rank_of(last),
            summaries: samples.iter().map(|s| (s.name.clone(), s.summary())).collect(),
            ranking,
            sufficient,
        });
    }
    Ok(IncrementalReport {
        latest_sufficient_for: per_target.iter().filter(|t| t.latest_matches_largest).count(),
        unions: infos,
        per_target,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityRow {
    pub source: String,
    pub is_bellwether: bool,
    pub features: Vec<(String, f64)>,
}

/// Trains one forest per dataset and lists its `k` most important
/// attributes. `bellwether` (a label or project name) marks its row.
pub fn source_instability_report(
    datasets: &[ProjectDataset],
    config: &LearnerConfig,
    seed: u64,
    k: usize,
    bellwether: Option<&str>,
) -> Result<Vec<InstabilityRow>> {
    if datasets.is_empty() {
        return Err(Error::Empty("dataset list"));
    }
    let rows = par_map(datasets.len(), |i| -> Result<InstabilityRow> {
        let d = &datasets[i];
        let mut learner = DirectStrategy::new(*config);
        learner.fit(d, derive_seed(seed, &[i as u64]))?;
        let mut features = feature_importance(learner.forest().expect("fitted"));
        features.truncate(k);
        Ok(InstabilityRow {
            source: d.label(),
            is_bellwether: bellwether.is_some_and(|b| b == d.label() || b == d.name()),
            features,
        })
    });
    rows.into_iter().collect()
}
