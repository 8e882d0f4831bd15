use serde::{Deserialize, Serialize};

use super::PairEvaluation;
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::stats::{a12, bootstrap_test, Summary, TestConfig};

/// Window lengths are counts of evaluations (each evaluation contributes all
/// of its repeat scores).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub baseline_len: usize,
    pub recent_len: usize,
    pub test: TestConfig,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            baseline_len: 5,
            recent_len: 5,
            test: TestConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MonitorState {
    #[serde(rename = "OK")]
    Ok,
    Degraded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evidence {
    pub significant: bool,
    pub p_value: f64,
    /// Probability that a baseline score beats a recent one.
    pub a12: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorStatus {
    pub state: MonitorState,
    pub evaluations: usize,
    pub baseline_window: Summary,
    pub recent_window: Summary,
    pub evidence: Evidence,
}

/// Compares the first `baseline_len` evaluations with the last `recent_len`.
/// The state is Degraded only when the bootstrap test finds a significant
/// difference and the baseline beats the recent window with an A12 of at
/// least the configured threshold; improvements never trigger.
pub fn monitor(history: &[PairEvaluation], cfg: &MonitorConfig) -> Result<MonitorStatus> {
    let scores: Vec<&[f64]> = history.iter().map(|e| e.scores.values.as_slice()).collect();
    monitor_scores(&scores, cfg)
}

/// [`monitor`] over raw per-evaluation score lists.
pub fn monitor_scores(history: &[&[f64]], cfg: &MonitorConfig) -> Result<MonitorStatus> {
    cfg.test.validate()?;
    if cfg.baseline_len == 0 || cfg.recent_len == 0 {
        return Err(Error::Config(
            "monitor windows must hold at least one evaluation".into(),
        ));
    }
    let needed = cfg.baseline_len + cfg.recent_len;
    if history.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            found: history.len(),
        });
    }
    let pool = |w: &[&[f64]]| -> Vec<f64> { w.iter().flat_map(|s| s.iter().copied()).collect() };
    let baseline = pool(&history[..cfg.baseline_len]);
    let recent = pool(&history[history.len() - cfg.recent_len..]);
    if baseline.is_empty() || recent.is_empty() {
        return Err(Error::Empty("monitor window"));
    }
    let test = cfg.test.with_seed(derive_seed(cfg.test.seed, &[history.len() as u64]));
    let outcome = bootstrap_test(&baseline, &recent, &test)?;
    let effect = a12(&baseline, &recent)?;
    let state = if outcome.significant && effect >= cfg.test.a12_threshold {
        MonitorState::Degraded
    } else {
        MonitorState::Ok
    };
    Ok(MonitorStatus {
        state,
        evaluations: history.len(),
        baseline_window: Summary::of(&baseline),
        recent_window: Summary::of(&recent),
        evidence: Evidence {
            significant: outcome.significant,
            p_value: outcome.p_value,
            a12: effect,
        },
    })
}

/// The status after each new evaluation, starting once the history is long
/// enough for both windows.
pub fn monitor_stream(history: &[&[f64]], cfg: &MonitorConfig) -> Result<Vec<MonitorStatus>> {
    let needed = cfg.baseline_len + cfg.recent_len;
    if history.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            found: history.len(),
        });
    }
    (needed..=history.len())
        .map(|n| monitor_scores(&history[..n], cfg))
        .collect()
}
