//! Acceptance suite: one PASS/FAIL/SKIP line per criterion, each checked
//! against its runtime budget. The corpus criterion runs only when
//! `BELLWETHER_CORPUS` names a directory holding `apache.toml` and
//! `aeeem.toml` manifests.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use bellwether_core::bellwether::{
    compare_within_vs_bellwether, discover, monitor_stream, transfer, BellwetherReport, MonitorConfig, MonitorState,
    Protocol, Verdict, WithinReport,
};
use bellwether_core::data::{make_community, order_versions, Community, Label, Manifest, ProjectDataset};
use bellwether_core::learners::{LearnerConfig, StrategySpec};
use bellwether_core::metrics::{confusion, sa, RegressionOutcome};
use bellwether_core::seed::{derive_seed, rng_for};
use bellwether_core::stats::{a12, scott_knott, Direction, SampleSet, TestConfig};
use bellwether_core::synth::{planted_community, PlantedConfig, PLANTED};
use rand::Rng;
use rand_distr::{Distribution, Normal};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// name, time budget in seconds, check
type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 metric oracles", 5, metric_oracles),
        ("2 a12 brute force", 5, a12_brute_force),
        ("3 scott-knott sanity", 30, scott_knott_sanity),
        ("4 planted bellwether recovery", 300, planted_recovery),
        ("5 corpus reproduction", 1800, corpus_reproduction),
        ("6 determinism across worker counts", 300, determinism),
        ("7 monitor drop detection", 60, monitor_drop),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let budget = Duration::from_secs(budget);
        let (status, detail) = match outcome {
            Outcome::Skip(d) => ("SKIP", d),
            Outcome::Pass(d) if elapsed <= budget => ("PASS", d),
            Outcome::Pass(d) => ("FAIL", format!("{d}; over time budget")),
            Outcome::Fail(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "{status} criterion {name}: {detail} [{:.2}s of {}s]",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn metric_oracles() -> Outcome {
    let mut rng = rng_for(1);
    let mut worst_g = 0.0f64;
    for _ in 0..1000 {
        let (tp, fn_, fp, tn) = (
            rng.random_range(0..200u64),
            rng.random_range(0..200u64),
            rng.random_range(0..200u64),
            rng.random_range(0..200u64),
        );
        let mut truth = Vec::new();
        let mut preds = Vec::new();
        for (t, p, k) in [
            (true, true, tp),
            (true, false, fn_),
            (false, true, fp),
            (false, false, tn),
        ] {
            for _ in 0..k {
                truth.push(if t { Label::Positive } else { Label::Negative });
                preds.push(if p { Label::Positive } else { Label::Negative });
            }
        }
        if truth.is_empty() {
            continue;
        }
        let got = confusion(&preds, &truth).unwrap().g_score();
        let pd = if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let pf = if fp + tn == 0 {
            0.0
        } else {
            fp as f64 / (fp + tn) as f64
        };
        let den = 1.0 + pd - pf;
        let want = if den == 0.0 { 0.0 } else { 2.0 * pd * (1.0 - pf) / den };
        worst_g = worst_g.max((got - want).abs());
    }

    let mut worst_sa = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=50usize);
        let truth: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1000.0)).collect();
        let preds: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1000.0)).collect();
        let got = sa(&RegressionOutcome::new(truth.clone(), preds.clone()).unwrap()).unwrap();
        let mar = truth.iter().zip(&preds).map(|(y, p)| (y - p).abs()).sum::<f64>() / n as f64;
        let mut pair_sum = 0.0;
        for i in 0..n {
            for j in 0..i {
                pair_sum += (truth[i] - truth[j]).abs();
            }
        }
        let d = 2.0 / (n * n) as f64 * pair_sum;
        let want = (1.0 - mar / d) * 100.0;
        worst_sa = worst_sa.max((got - want).abs() / want.abs().max(1.0));
    }
    verdict(
        worst_g <= 1e-12 && worst_sa <= 1e-9,
        format!("max |G error| {worst_g:.1e} (tol 1e-12), max SA error {worst_sa:.1e} (tol 1e-9)"),
    )
}

fn a12_brute_force() -> Outcome {
    let mut rng = rng_for(2);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=40usize);
        let m = rng.random_range(1..=40usize);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
        let ys: Vec<f64> = (0..m).map(|_| rng.random_range(0..8) as f64).collect();
        let (mut gt, mut eq) = (0u64, 0u64);
        for x in &xs {
            for y in &ys {
                if x > y {
                    gt += 1;
                } else if x == y {
                    eq += 1;
                }
            }
        }
        let want = (2 * gt + eq) as f64 / (2 * n * m) as f64;
        if a12(&xs, &ys).unwrap() != want {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("{mismatches}/500 pairs differ from enumeration"),
    )
}

fn normal(mu: f64, sd: f64, n: usize, seed: u64) -> Vec<f64> {
    let d = Normal::new(mu, sd).unwrap();
    let mut rng = rng_for(seed);
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

fn scott_knott_sanity() -> Outcome {
    let (mut separated, mut shared) = (0, 0);
    for run in 0..100u64 {
        let cfg = TestConfig::default().with_seed(run);
        let a = SampleSet::new("A", normal(10.0, 0.1, 30, derive_seed(run, &[0]))).unwrap();
        let b = SampleSet::new("B", normal(0.0, 0.1, 30, derive_seed(run, &[1]))).unwrap();
        let r = scott_knott(&[b, a.clone()], &cfg, Direction::HigherIsBetter).unwrap();
        if r.top() == ["A"] {
            separated += 1;
        }
        let copy = SampleSet::new("A-copy", a.values.clone()).unwrap();
        let r = scott_knott(&[a, copy], &cfg, Direction::HigherIsBetter).unwrap();
        if r.groups.len() == 1 {
            shared += 1;
        }
    }
    verdict(
        separated == 100 && shared == 100,
        format!("A sole rank 1 in {separated}/100, A and A-copy share one rank in {shared}/100"),
    )
}

fn direct() -> StrategySpec {
    StrategySpec::direct(LearnerConfig::default())
}

fn planted_recovery() -> Outcome {
    let mut hits = 0;
    for run in 0..20u64 {
        let c = planted_community(&PlantedConfig {
            seed: run,
            ..Default::default()
        })
        .unwrap();
        let r = discover(
            &c,
            &direct(),
            &Protocol {
                seed: run,
                ..Default::default()
            },
        )
        .unwrap();
        if r.verdict == Verdict::Found && r.overall_bellwether == [PLANTED] {
            hits += 1;
        }
    }
    verdict(
        hits >= 18,
        format!("planted source is the sole bellwether in {hits}/20 runs (need 18)"),
    )
}

fn determinism() -> Outcome {
    let mut identical = 0;
    for trial in 0..10u64 {
        let c = planted_community(&PlantedConfig {
            seed: 100 + trial,
            ..Default::default()
        })
        .unwrap();
        let p = Protocol {
            seed: trial,
            ..Default::default()
        };
        let run = |workers: usize| -> BellwetherReport {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap()
                .install(|| discover(&c, &direct(), &p).unwrap())
        };
        if run(1) == run(3) {
            identical += 1;
        }
    }
    verdict(
        identical == 10,
        format!("{identical}/10 trials identical with 1 and 3 workers"),
    )
}

fn monitor_drop() -> Outcome {
    const DROP_AT: usize = 12;
    const LEN: usize = 20;
    let cfg = MonitorConfig::default();
    let first_full = DROP_AT + cfg.recent_len;
    let mut good = 0;
    let mut notes = Vec::new();
    for trial in 0..20u64 {
        let history: Vec<Vec<f64>> = (0..LEN)
            .map(|t| {
                let level = if t < DROP_AT { 0.7 } else { 0.3 };
                normal(level, 0.05, 30, derive_seed(trial, &[t as u64]))
                    .into_iter()
                    .map(|g| g.clamp(0.0, 1.0))
                    .collect()
            })
            .collect();
        let refs: Vec<&[f64]> = history.iter().map(Vec::as_slice).collect();
        let cfg = MonitorConfig {
            test: TestConfig::default().with_seed(trial),
            ..cfg
        };
        let stream = monitor_stream(&refs, &cfg).unwrap();
        let degraded_at = |n: usize| stream[n - (cfg.baseline_len + cfg.recent_len)].state == MonitorState::Degraded;
        let early = (cfg.baseline_len + cfg.recent_len..=DROP_AT).any(degraded_at);
        let caught = degraded_at(first_full);
        if !early && caught {
            good += 1;
        } else {
            notes.push(format!("trial {trial}: early={early} caught={caught}"));
        }
    }
    verdict(
        good == 20,
        format!("{good}/20 trials flag the drop by evaluation {first_full} and not before {DROP_AT} {notes:?}"),
    )
}

fn project_name(label: &str) -> &str {
    label.split('@').next().unwrap_or(label)
}

fn latest_versions(c: &Community) -> Community {
    let mut names: Vec<&str> = Vec::new();
    for d in c.datasets() {
        if !names.contains(&d.name()) {
            names.push(d.name());
        }
    }
    let latest: Vec<ProjectDataset> = names
        .iter()
        .map(|n| {
            let versions: Vec<ProjectDataset> = c.datasets().iter().filter(|d| d.name() == *n).cloned().collect();
            if versions.len() == 1 {
                versions.into_iter().next().unwrap()
            } else {
                order_versions(versions).unwrap().pop().unwrap()
            }
        })
        .collect();
    make_community(c.name.clone(), latest, c.task).unwrap()
}

fn find<'a>(c: &'a Community, name: &str) -> &'a ProjectDataset {
    c.datasets()
        .iter()
        .rev()
        .find(|d| d.name().eq_ignore_ascii_case(name))
        .unwrap_or_else(|| panic!("corpus has no project named {name}"))
}

fn within_direction(r: &WithinReport, project: &str) -> Option<(f64, f64)> {
    let row = r.rows.iter().find(|row| row.project.eq_ignore_ascii_case(project))?;
    Some((row.bellwether_summary?.median, row.local_summary.median))
}

fn corpus_reproduction() -> Outcome {
    let Some(dir) = std::env::var_os("BELLWETHER_CORPUS").map(PathBuf::from) else {
        return Outcome::Skip("BELLWETHER_CORPUS not set; Apache and AEEEM corpora not supplied".into());
    };
    let load = |file: &str| -> Community {
        Manifest::from_path(dir.join(file))
            .and_then(|m| m.load_community())
            .unwrap_or_else(|e| panic!("{file}: {e}"))
    };
    let apache = load("apache.toml");
    let aeeem = load("aeeem.toml");
    let protocol = Protocol::default();

    let report = discover(&latest_versions(&apache), &direct(), &protocol).unwrap();
    let lucene = report
        .overall_bellwether
        .iter()
        .any(|b| project_name(b).eq_ignore_ascii_case("lucene"));

    let eq = transfer(
        find(&aeeem, "LC"),
        find(&aeeem, "EQ"),
        &direct(),
        protocol.repeats,
        protocol.seed,
    )
    .unwrap();
    let eq_median = eq.scores.median();
    let eq_ok = (eq_median - 0.74).abs() <= 0.10;

    let within = compare_within_vs_bellwether(&apache, &direct(), &protocol, None).unwrap();
    let xalan = within_direction(&within, "xalan");
    let jedit = within_direction(&within, "jedit");
    let xalan_ok = xalan.is_some_and(|(b, l)| b > l);
    let jedit_ok = jedit.is_some_and(|(b, l)| l > b);

    verdict(
        lucene && eq_ok && xalan_ok && jedit_ok,
        format!(
            "apache bellwether {:?} (want lucene); LC on EQ median G {eq_median:.3} (want 0.74 ± 0.10); \
             xalan bellwether/local {xalan:?} (want bellwether > local); jedit {jedit:?} (want local > bellwether)",
            report.overall_bellwether
        ),
    )
}
