//! Bellwether discovery, transfer and monitoring.
//!
//! Discovery uses a round-robin holdout: each project in turn is set aside,
//! every remaining project is scored as a training source for every other
//! remaining project, and Scott-Knott ranks the sources on their pooled
//! scores. A source that is alone or jointly top-ranked, with a real
//! separation from the rest, for a strict majority of holdouts is the
//! community's bellwether.

mod compare;
mod monitor;

use serde::{Deserialize, Serialize};

use crate::data::{ensure_same_schema, Community, ProjectDataset, Target, TaskKind};
use crate::error::{Error, Result};
use crate::learners::{Predictions, StrategySpec};
use crate::metrics::{confusion, sa, RegressionOutcome};
use crate::seed::derive_seed;
use crate::stats::{scott_knott, Direction, RankedGroups, SampleSet, Summary, TestConfig};

pub use compare::{
    compare_within_vs_bellwether, incremental_sufficiency, source_instability_report, win_tie_loss, Context,
    ContextRanking, IncrementalReport, InstabilityRow, MethodWtl, TargetSufficiency, UnionInfo, WithinReport,
    WithinRow, WithinWinner, Wtl, WtlTable,
};
pub use monitor::{monitor, monitor_scores, monitor_stream, Evidence, MonitorConfig, MonitorState, MonitorStatus};

// Path element that keeps ranking seeds apart from training seeds.
const RANKING: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    G,
    SA,
}

impl Metric {
    pub fn for_task(task: TaskKind) -> Metric {
        match task {
            TaskKind::Classification => Metric::G,
            TaskKind::Regression => Metric::SA,
        }
    }
}

/// Repeat count, master seed and statistical-test settings for one
/// experiment. The seed inside `test` is ignored: ranking seeds are derived
/// from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub repeats: usize,
    pub seed: u64,
    pub test: TestConfig,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            repeats: 30,
            seed: 0,
            test: TestConfig::default(),
        }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        self.test.validate()
    }

    pub(crate) fn ranking_config(&self, path: &[u64]) -> TestConfig {
        let mut full = vec![RANKING];
        full.extend_from_slice(path);
        self.test.with_seed(derive_seed(self.seed, &full))
    }
}

/// Scores of one source applied to one target, one value per repeat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEvaluation {
    pub source: String,
    pub target: String,
    pub metric: Metric,
    pub scores: SampleSet,
}

impl PairEvaluation {
    pub fn summary(&self) -> Summary {
        self.scores.summary()
    }
}

/// G for label predictions, SA for numeric ones.
pub fn score_predictions(predictions: &Predictions, truth: &Target) -> Result<f64> {
    match (predictions, truth) {
        (Predictions::Labels(p), Target::Labels(t)) => Ok(confusion(p, t)?.g_score()),
        (Predictions::Values(p), Target::Values(t)) => sa(&RegressionOutcome::new(t.clone(), p.clone())?),
        _ => Err(Error::Config("predictions and target are of different kinds".into())),
    }
}

fn check_compatible(source: &ProjectDataset, target: &ProjectDataset) -> Result<()> {
    if source.task() != target.task() {
        return Err(Error::MixedTask {
            dataset: target.label(),
            expected: source.task(),
            found: target.task(),
        });
    }
    ensure_same_schema(source, target)
}

/// Fits once on `source` and scores every target.
fn fit_and_score(
    strategy: &StrategySpec,
    source: &ProjectDataset,
    targets: &[&ProjectDataset],
    seed: u64,
) -> Result<Vec<f64>> {
    let mut learner = strategy.instantiate();
    learner.fit(source, seed)?;
    targets
        .iter()
        .map(|t| score_predictions(&learner.predict(t.features())?, t.target()))
        .collect()
}

pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn run_repeats(
    strategy: &StrategySpec,
    source: &ProjectDataset,
    target: &ProjectDataset,
    repeats: usize,
    seed: u64,
) -> Result<PairEvaluation> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    check_compatible(source, target)?;
    let runs = par_map(repeats, |r| {
        fit_and_score(strategy, source, &[target], derive_seed(seed, &[r as u64]))
            .map(|v| v[0])
            .map_err(|e| Error::Run {
                run: r,
                source: Box::new(e),
            })
    });
    let scores = runs.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(PairEvaluation {
        source: source.label(),
        target: target.label(),
        metric: Metric::for_task(source.task()),
        scores: SampleSet::new(source.label(), scores)?,
    })
}

/// Trains on `source` and scores `target` once per repeat; repeat `r` uses
/// the seed derived from `(seed, r)`.
pub fn evaluate_pair(
    source: &ProjectDataset,
    target: &ProjectDataset,
    strategy: &StrategySpec,
    repeats: usize,
    seed: u64,
) -> Result<PairEvaluation> {
    if source.label() == target.label() {
        return Err(Error::Config(format!(
            "source and target are the same dataset '{}'",
            source.label()
        )));
    }
    run_repeats(strategy, source, target, repeats, seed)
}

/// Applies a bellwether to a new project. Unlike [`evaluate_pair`] the new
/// project may be the bellwether itself, which gives self-transfer scores.
pub fn transfer(
    bellwether: &ProjectDataset,
    new_project: &ProjectDataset,
    strategy: &StrategySpec,
    repeats: usize,
    seed: u64,
) -> Result<PairEvaluation> {
    run_repeats(strategy, bellwether, new_project, repeats, seed)
}

/// Scores of every ordered (source, target) pair in a list of datasets.
///
/// Each (source, repeat) trains once, with the seed derived from
/// `(seed, source index, repeat)`, and predicts every other dataset, so
/// `scores(i, k)` equals `evaluate_pair(d[i], d[k], .., derive_seed(seed, &[i]))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrid {
    labels: Vec<String>,
    metric: Metric,
    repeats: usize,
    scores: Vec<Vec<Vec<f64>>>,
}

impl PairGrid {
    pub fn compute(
        datasets: &[ProjectDataset],
        strategy: &StrategySpec,
        repeats: usize,
        seed: u64,
    ) -> Result<PairGrid> {
        let first = datasets.first().ok_or(Error::Empty("dataset list"))?;
        if repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        for d in &datasets[1..] {
            check_compatible(first, d)?;
        }
        let n = datasets.len();
        let runs = par_map(n * repeats, |job| {
            let (i, r) = (job / repeats, job % repeats);
            let targets: Vec<&ProjectDataset> = (0..n).filter(|&k| k != i).map(|k| &datasets[k]).collect();
            fit_and_score(
                strategy,
                &datasets[i],
                &targets,
                derive_seed(seed, &[i as u64, r as u64]),
            )
            .map_err(|e| Error::Run {
                run: r,
                source: Box::new(e),
            })
        });
        let mut scores = vec![vec![Vec::with_capacity(repeats); n]; n];
        for (job, run) in runs.into_iter().enumerate() {
            let i = job / repeats;
            let row = run?;
            for (k, v) in (0..n).filter(|&k| k != i).zip(row) {
                scores[i][k].push(v);
            }
        }
        Ok(PairGrid {
            labels: datasets.iter().map(ProjectDataset::label).collect(),
            metric: Metric::for_task(first.task()),
            repeats,
            scores,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }

    /// Empty when `source == target`.
    pub fn scores(&self, source: usize, target: usize) -> &[f64] {
        &self.scores[source][target]
    }

    pub fn pair(&self, source: usize, target: usize) -> Result<PairEvaluation> {
        Ok(PairEvaluation {
            source: self.labels[source].clone(),
            target: self.labels[target].clone(),
            metric: self.metric,
            scores: SampleSet::new(self.labels[source].clone(), self.scores(source, target).to_vec())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Found,
    NotFound,
}

/// A top-ranked source's scores for one holdout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopScore {
    pub source: String,
    /// The source applied to the holdout itself.
    pub on_holdout: Summary,
    /// The source's pooled scores over the remaining test targets.
    pub on_test_targets: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutResult {
    pub holdout: String,
    pub ranking: RankedGroups,
    /// Rank-1 sources, or empty when all sources share one rank.
    pub bellwethers: Vec<String>,
    /// Scores for every rank-1 source, separated or not.
    pub top: Vec<TopScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Support {
    pub source: String,
    pub holdouts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub source: String,
    pub target: String,
    pub median: f64,
    pub iqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellwetherReport {
    pub community: String,
    pub metric: Metric,
    pub per_holdout: Vec<HoldoutResult>,
    /// Holdouts for which each source was a bellwether, in dataset order.
    pub support: Vec<Support>,
    /// Sources supported by a strict majority of holdouts.
    pub overall_bellwether: Vec<String>,
    pub verdict: Verdict,
    pub pairs: Vec<PairSummary>,
}

impl BellwetherReport {
    /// The overall bellwether with the most support; the earlier dataset wins
    /// a tie.
    pub fn leading_bellwether(&self) -> Option<&str> {
        self.support
            .iter()
            .filter(|s| self.overall_bellwether.contains(&s.source))
            .fold(None::<&Support>, |best, s| match best {
                Some(b) if b.holdouts >= s.holdouts => Some(b),
                _ => Some(s),
            })
            .map(|s| s.source.as_str())
    }
}

/// Runs the holdout protocol over the datasets at `members` (indices into the
/// grid).
pub fn rank_holdouts(
    grid: &PairGrid,
    members: &[usize],
    community: &str,
    protocol: &Protocol,
) -> Result<BellwetherReport> {
    protocol.validate()?;
    if members.len() < 3 {
        return Err(Error::TooFewDatasets {
            what: "bellwether discovery",
            needed: 3,
            found: members.len(),
        });
    }
    let label = |i: usize| grid.labels[i].clone();
    let mut per_holdout = Vec::with_capacity(members.len());
    for &j in members {
        let sources: Vec<usize> = members.iter().copied().filter(|&i| i != j).collect();
        let pooled: Vec<SampleSet> = sources
            .iter()
            .map(|&i| {
                let values: Vec<f64> = sources
                    .iter()
                    .filter(|&&k| k != i)
                    .flat_map(|&k| grid.scores(i, k).iter().copied())
                    .collect();
                SampleSet::new(label(i), values)
            })
            .collect::<Result<_>>()?;
        let ranking = scott_knott(
            &pooled,
            &protocol.ranking_config(&[j as u64]),
            Direction::HigherIsBetter,
        )?;
        let top: Vec<TopScore> = ranking
            .top()
            .iter()
            .map(|name| {
                let pos = sources
                    .iter()
                    .position(|&i| grid.labels[i] == *name)
                    .expect("ranked name is a source");
                TopScore {
                    source: name.clone(),
                    on_holdout: Summary::of(grid.scores(sources[pos], j)),
                    on_test_targets: pooled[pos].summary(),
                }
            })
            .collect();
        let bellwethers = if ranking.separated() {
            ranking.top().to_vec()
        } else {
            Vec::new()
        };
        per_holdout.push(HoldoutResult {
            holdout: label(j),
            ranking,
            bellwethers,
            top,
        });
    }

    let support: Vec<Support> = members
        .iter()
        .map(|&i| Support {
            source: label(i),
            holdouts: per_holdout
                .iter()
                .filter(|h| h.bellwethers.contains(&grid.labels[i]))
                .count(),
        })
        .collect();
    let overall_bellwether: Vec<String> = support
        .iter()
        .filter(|s| 2 * s.holdouts > members.len())
        .map(|s| s.source.clone())
        .collect();
    let verdict = if overall_bellwether.is_empty() {
        Verdict::NotFound
    } else {
        Verdict::Found
    };
    let mut pairs = Vec::new();
    for &i in members {
        for &k in members {
            if i != k {
                let s = Summary::of(grid.scores(i, k));
                pairs.push(PairSummary {
                    source: label(i),
                    target: label(k),
                    median: s.median,
                    iqr: s.iqr,
                });
            }
        }
    }
    Ok(BellwetherReport {
        community: community.to_string(),
        metric: grid.metric,
        per_holdout,
        support,
        overall_bellwether,
        verdict,
        pairs,
    })
}

/// Finds the community's bellwether with the round-robin holdout protocol.
pub fn discover(community: &Community, strategy: &StrategySpec, protocol: &Protocol) -> Result<BellwetherReport> {
    protocol.validate()?;
    if community.len() < 3 {
        return Err(Error::TooFewDatasets {
            what: "bellwether discovery",
            needed: 3,
            found: community.len(),
        });
    }
    let grid = PairGrid::compute(community.datasets(), strategy, protocol.repeats, protocol.seed)?;
    let all: Vec<usize> = (0..community.len()).collect();
    rank_holdouts(&grid, &all, &community.name, protocol)
}
