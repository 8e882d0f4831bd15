use std::collections::HashMap;
use std::path::{Path, PathBuf};

use bellwether_core::bellwether::{
    compare_within_vs_bellwether, discover, incremental_sufficiency, monitor_scores, monitor_stream,
    source_instability_report, transfer, win_tie_loss, Context, MonitorConfig, MonitorStatus, PairEvaluation, Protocol,
    WithinWinner,
};
use bellwether_core::data::{order_versions, validate_manifest, write_csv, Community, Manifest, ProjectDataset};
use bellwether_core::learners::{ForestParams, LearnerConfig, Ratio, StrategyRegistry, StrategySpec};
use bellwether_core::seed::derive_seed;
use bellwether_core::stats::{scott_knott, Direction, RankedGroups, SampleSet, Summary, TestConfig};
use bellwether_core::synth::{planted_community, PlantedConfig};
use log::info;
use serde::Serialize;
use serde_json::json;

use crate::args::{Command, Common};
use crate::report::{num, opt_num, CliError, CliResult, Output, Table};

/// Everything a report needs to be re-derived.
#[derive(Debug, Serialize)]
pub struct ResolvedConfig {
    pub manifest: Option<PathBuf>,
    pub repeats: usize,
    pub seed: u64,
    pub strategy: String,
    pub learner: LearnerConfig,
    pub test: TestConfig,
    pub options: serde_json::Value,
}

pub struct Runner {
    pub config: ResolvedConfig,
    strategy: StrategySpec,
    protocol: Protocol,
}

impl Runner {
    pub fn new(common: &Common, command: &Command) -> CliResult<Runner> {
        let ratio: Ratio = common.ratio.parse()?;
        let forest = ForestParams {
            n_trees: common.trees,
            ..ForestParams::default()
        };
        forest.validate()?;
        let learner = LearnerConfig { forest, ratio };
        let strategy = StrategyRegistry::default().resolve(&common.strategy, learner)?;
        let test = TestConfig {
            bootstrap_resamples: common.bootstrap,
            confidence: common.confidence,
            a12_threshold: common.effect_threshold,
            seed: common.seed,
        };
        let protocol = Protocol {
            repeats: common.repeats,
            seed: common.seed,
            test,
        };
        protocol.validate()?;
        Ok(Runner {
            config: ResolvedConfig {
                manifest: common.manifest.clone(),
                repeats: common.repeats,
                seed: common.seed,
                strategy: strategy.name().to_string(),
                learner,
                test,
                options: options(command),
            },
            strategy,
            protocol,
        })
    }

    fn manifest(&self) -> CliResult<Manifest> {
        let path = self
            .config
            .manifest
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs --manifest"))?;
        Ok(Manifest::from_path(path)?)
    }

    fn community(&self) -> CliResult<Community> {
        let c = self.manifest()?.load_community()?;
        info!("community {}: {} datasets", c.name, c.len());
        Ok(c)
    }

    pub fn run(&self, command: &Command) -> CliResult<Output> {
        match command {
            Command::Discover => self.discover(),
            Command::Transfer { source, target } => self.transfer(source, target),
            Command::Monitor {
                history,
                bellwether,
                baseline,
                recent,
                stream,
            } => self.monitor(history.as_deref(), bellwether.as_deref(), *baseline, *recent, *stream),
            Command::CompareMethods { input, lower_is_better } => self.compare_methods(input, *lower_is_better),
            Command::WithinVsBellwether { bellwether } => self.within(bellwether.as_deref()),
            Command::Incremental { project, target } => self.incremental(project, target),
            Command::Rank { input, lower_is_better } => self.rank(input, *lower_is_better),
            Command::Instability { top, bellwether } => self.instability(*top, bellwether.as_deref()),
            Command::Validate => self.validate_table(),
            Command::Synth {
                dir,
                rows,
                attributes,
                noisy_projects,
                noise,
                versions,
            } => self.synth(
                dir,
                PlantedConfig {
                    rows: *rows,
                    attributes: *attributes,
                    noisy_projects: *noisy_projects,
                    noise: *noise,
                    versions: *versions,
                    seed: self.config.seed,
                },
            ),
        }
    }

    fn discover(&self) -> CliResult<Output> {
        let community = self.community()?;
        let report = discover(&community, &self.strategy, &self.protocol)?;
        info!(
            "verdict {:?}, overall bellwether {:?}",
            report.verdict, report.overall_bellwether
        );
        let mut t = Table::new(&[
            "holdout",
            "bellwethers",
            "top_source",
            "holdout_median",
            "holdout_iqr",
            "targets_median",
            "targets_iqr",
        ]);
        for h in &report.per_holdout {
            for top in &h.top {
                t.push(vec![
                    h.holdout.clone(),
                    h.bellwethers.join(";"),
                    top.source.clone(),
                    num(top.on_holdout.median),
                    num(top.on_holdout.iqr),
                    num(top.on_test_targets.median),
                    num(top.on_test_targets.iqr),
                ]);
            }
        }
        Output::new(&report, t)
    }

    fn transfers(&self, community: &Community, source: &str, targets: &[String]) -> CliResult<Vec<PairEvaluation>> {
        let src = community.get(source)?;
        let chosen: Vec<(usize, &ProjectDataset)> = if targets.is_empty() {
            community
                .datasets()
                .iter()
                .enumerate()
                .filter(|(_, d)| d.label() != src.label())
                .collect()
        } else {
            targets
                .iter()
                .map(|t| {
                    let d = community.get(t)?;
                    let k = community
                        .datasets()
                        .iter()
                        .position(|x| x.label() == d.label())
                        .unwrap_or(0);
                    Ok((k, d))
                })
                .collect::<bellwether_core::Result<_>>()?
        };
        let mut out = Vec::with_capacity(chosen.len());
        for (k, d) in chosen {
            info!("transfer {} -> {}", src.label(), d.label());
            out.push(transfer(
                src,
                d,
                &self.strategy,
                self.protocol.repeats,
                derive_seed(self.protocol.seed, &[k as u64]),
            )?);
        }
        Ok(out)
    }

    fn transfer(&self, source: &str, targets: &[String]) -> CliResult<Output> {
        let community = self.community()?;
        let evals = self.transfers(&community, source, targets)?;
        let mut t = Table::new(&["source", "target", "metric", "median", "iqr", "mean"]);
        for e in &evals {
            let s = e.summary();
            t.push(vec![
                e.source.clone(),
                e.target.clone(),
                format!("{:?}", e.metric),
                num(s.median),
                num(s.iqr),
                num(s.mean),
            ]);
        }
        Output::new(&evals, t)
    }

    fn monitor(
        &self,
        history: Option<&Path>,
        bellwether: Option<&str>,
        baseline: usize,
        recent: usize,
        stream: bool,
    ) -> CliResult<Output> {
        let columns: Columns = match (history, bellwether) {
            (Some(p), _) => read_columns(p)?,
            (None, Some(b)) => {
                let community = self.community()?;
                self.transfers(&community, b, &[])?
                    .into_iter()
                    .map(|e| (e.target, e.scores.values))
                    .collect()
            }
            (None, None) => return Err(CliError::config("monitor needs --history or --bellwether")),
        };
        let scores: Vec<&[f64]> = columns.iter().map(|(_, v)| v.as_slice()).collect();
        let cfg = MonitorConfig {
            baseline_len: baseline,
            recent_len: recent,
            test: self.protocol.test,
        };
        let statuses: Vec<MonitorStatus> = if stream {
            monitor_stream(&scores, &cfg)?
        } else {
            vec![monitor_scores(&scores, &cfg)?]
        };
        if let Some(last) = statuses.last() {
            info!("state after {} evaluations: {:?}", last.evaluations, last.state);
        }
        let mut t = Table::new(&[
            "evaluations",
            "latest",
            "state",
            "significant",
            "p_value",
            "a12",
            "baseline_median",
            "recent_median",
        ]);
        for s in &statuses {
            t.push(vec![
                s.evaluations.to_string(),
                columns[s.evaluations - 1].0.clone(),
                state_name(s),
                s.evidence.significant.to_string(),
                num(s.evidence.p_value),
                num(s.evidence.a12),
                num(s.baseline_window.median),
                num(s.recent_window.median),
            ]);
        }
        let evaluations: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
        if stream {
            Output::new(&json!({ "evaluations": evaluations, "statuses": statuses }), t)
        } else {
            Output::new(&json!({ "evaluations": evaluations, "status": statuses[0] }), t)
        }
    }

    fn compare_methods(&self, input: &Path, lower_is_better: bool) -> CliResult<Output> {
        let contexts = read_contexts(input)?;
        let table = win_tie_loss(&contexts, &self.protocol.test, direction(lower_is_better))?;
        let mut t = Table::new(&["method", "wins", "ties", "losses"]);
        for m in &table.methods {
            t.push(vec![
                m.method.clone(),
                m.wtl.wins.to_string(),
                m.wtl.ties.to_string(),
                m.wtl.losses.to_string(),
            ]);
        }
        Output::new(&table, t)
    }

    fn within(&self, bellwether: Option<&str>) -> CliResult<Output> {
        let community = self.community()?;
        let report = compare_within_vs_bellwether(&community, &self.strategy, &self.protocol, bellwether)?;
        let mut t = Table::new(&[
            "project",
            "holdout",
            "local_source",
            "bellwether_source",
            "local_median",
            "local_iqr",
            "bellwether_median",
            "bellwether_iqr",
            "winner",
        ]);
        for r in &report.rows {
            t.push(vec![
                r.project.clone(),
                r.holdout.clone(),
                r.local_source.clone(),
                r.bellwether_source.clone().unwrap_or_default(),
                num(r.local_summary.median),
                num(r.local_summary.iqr),
                opt_num(r.bellwether_summary.map(|s| s.median)),
                opt_num(r.bellwether_summary.map(|s| s.iqr)),
                winner_name(r.winner).to_string(),
            ]);
        }
        Output::new(&report, t)
    }

    fn incremental(&self, project: &str, targets: &[String]) -> CliResult<Output> {
        let community = self.community()?;
        let versions: Vec<ProjectDataset> = community
            .datasets()
            .iter()
            .filter(|d| d.name() == project)
            .cloned()
            .collect();
        if versions.is_empty() {
            return Err(CliError::data(format!("no datasets for project '{project}'")));
        }
        let mut newest_first = order_versions(versions)?;
        newest_first.reverse();
        let chosen: Vec<ProjectDataset> = if targets.is_empty() {
            community
                .datasets()
                .iter()
                .filter(|d| d.name() != project)
                .cloned()
                .collect()
        } else {
            targets
                .iter()
                .map(|t| community.get(t).cloned())
                .collect::<bellwether_core::Result<_>>()?
        };
        let report = incremental_sufficiency(&newest_first, &chosen, &self.strategy, &self.protocol)?;
        let mut t = Table::new(&["target", "union", "rank", "median", "iqr", "sufficient"]);
        for ts in &report.per_target {
            for (name, s) in &ts.summaries {
                t.push(vec![
                    ts.target.clone(),
                    name.clone(),
                    ts.ranking.rank_of(name).map(|r| r.to_string()).unwrap_or_default(),
                    num(s.median),
                    num(s.iqr),
                    (name == &ts.sufficient).to_string(),
                ]);
            }
        }
        Output::new(&report, t)
    }

    fn rank(&self, input: &Path, lower_is_better: bool) -> CliResult<Output> {
        let samples = read_columns(input)?
            .into_iter()
            .map(|(n, v)| SampleSet::new(n, v))
            .collect::<bellwether_core::Result<Vec<_>>>()?;
        let ranking = scott_knott(&samples, &self.protocol.test, direction(lower_is_better))?;
        let rows = ranked_summaries(&ranking, &samples);
        let mut t = Table::new(&["treatment", "rank", "n", "median", "iqr"]);
        for r in &rows {
            t.push(vec![
                r.treatment.clone(),
                r.rank.to_string(),
                r.summary.n.to_string(),
                num(r.summary.median),
                num(r.summary.iqr),
            ]);
        }
        Output::new(&json!({ "ranking": ranking, "treatments": rows }), t)
    }

    fn instability(&self, top: usize, bellwether: Option<&str>) -> CliResult<Output> {
        let community = self.community()?;
        let rows = source_instability_report(
            community.datasets(),
            self.strategy.config(),
            self.protocol.seed,
            top,
            bellwether,
        )?;
        let mut t = Table::new(&["source", "is_bellwether", "rank", "attribute", "importance"]);
        for r in &rows {
            for (i, (a, w)) in r.features.iter().enumerate() {
                t.push(vec![
                    r.source.clone(),
                    r.is_bellwether.to_string(),
                    (i + 1).to_string(),
                    a.clone(),
                    num(*w),
                ]);
            }
        }
        Output::new(&rows, t)
    }

    /// Validation as a report; the text form is produced by [`validate_lines`].
    fn validate_table(&self) -> CliResult<Output> {
        let report = validate_manifest(&self.manifest()?);
        let mut t = Table::new(&[
            "dataset",
            "ok",
            "rows",
            "attributes",
            "positives",
            "duplicate_rows",
            "constant_columns",
            "error",
        ]);
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for d in &report.datasets {
            t.push(vec![
                d.dataset.clone(),
                d.ok.to_string(),
                opt(d.rows),
                opt(d.attributes),
                opt(d.positives),
                opt(d.duplicate_rows),
                d.constant_columns.join(";"),
                d.error.clone().unwrap_or_default(),
            ]);
        }
        let ok = report.ok();
        let mut out = Output::new(&report, t)?;
        if !ok {
            out.failure = Some(invalid_manifest(&report.community));
        }
        Ok(out)
    }

    /// Text form of `validate`: one line per dataset plus a schema line.
    pub fn validate_lines(&self) -> CliResult<Output> {
        let report = validate_manifest(&self.manifest()?);
        let mut out = Output::new(&report, Table::default())?;
        out.text = Some(report.lines().join("\n") + "\n");
        if !report.ok() {
            out.failure = Some(invalid_manifest(&report.community));
        }
        Ok(out)
    }

    fn synth(&self, dir: &Path, cfg: PlantedConfig) -> CliResult<Output> {
        let community = planted_community(&cfg)?;
        std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        let mut manifest = format!(
            "community = \"{}\"\ntask = \"classification\"\npositive_rule = \"bug > 0\"\nclass_column = \"bug\"\n",
            community.name
        );
        let mut files = Vec::new();
        for d in community.datasets() {
            let file = format!("{}.csv", d.label().replace('@', "-"));
            let path = dir.join(&file);
            let f = std::fs::File::create(&path)
                .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))?;
            write_csv(d, f)?;
            manifest.push_str(&format!("\n[[dataset]]\nname = \"{}\"\n", d.name()));
            if let Some(v) = d.version() {
                manifest.push_str(&format!("version = \"{v}\"\n"));
            }
            manifest.push_str(&format!("path = \"{file}\"\n"));
            files.push(file);
        }
        let mpath = dir.join("manifest.toml");
        std::fs::write(&mpath, manifest)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", mpath.display())))?;
        info!("wrote {} datasets to {}", files.len(), dir.display());
        let mut t = Table::new(&["file"]);
        t.push(vec!["manifest.toml".into()]);
        for f in &files {
            t.push(vec![f.clone()]);
        }
        Output::new(&json!({ "manifest": "manifest.toml", "datasets": files }), t)
    }
}

pub fn invalid_manifest(community: &str) -> CliError {
    CliError::data(format!("manifest for '{community}' has invalid datasets"))
}

fn options(command: &Command) -> serde_json::Value {
    match command {
        Command::Discover | Command::Validate => json!({}),
        Command::Transfer { source, target } => json!({ "source": source, "target": target }),
        Command::Monitor {
            history,
            bellwether,
            baseline,
            recent,
            stream,
        } => json!({
            "history": history,
            "bellwether": bellwether,
            "baseline": baseline,
            "recent": recent,
            "stream": stream,
        }),
        Command::CompareMethods { input, lower_is_better } | Command::Rank { input, lower_is_better } => {
            json!({ "input": input, "lower_is_better": lower_is_better })
        }
        Command::WithinVsBellwether { bellwether } => json!({ "bellwether": bellwether }),
        Command::Incremental { project, target } => json!({ "project": project, "target": target }),
        Command::Instability { top, bellwether } => json!({ "top": top, "bellwether": bellwether }),
        Command::Synth {
            dir,
            rows,
            attributes,
            noisy_projects,
            noise,
            versions,
        } => json!({
            "dir": dir,
            "rows": rows,
            "attributes": attributes,
            "noisy_projects": noisy_projects,
            "noise": noise,
            "versions": versions,
        }),
    }
}

fn direction(lower_is_better: bool) -> Direction {
    if lower_is_better {
        Direction::LowerIsBetter
    } else {
        Direction::HigherIsBetter
    }
}

fn state_name(s: &MonitorStatus) -> String {
    serde_json::to_value(s.state)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn winner_name(w: WithinWinner) -> &'static str {
    match w {
        WithinWinner::Bellwether => "bellwether",
        WithinWinner::Local => "local",
        WithinWinner::Tie => "tie",
        WithinWinner::NoBellwether => "no-bellwether",
    }
}

#[derive(Debug, Serialize)]
struct RankedTreatment {
    treatment: String,
    rank: usize,
    summary: Summary,
}

fn ranked_summaries(ranking: &RankedGroups, samples: &[SampleSet]) -> Vec<RankedTreatment> {
    let by_name: HashMap<&str, &SampleSet> = samples.iter().map(|s| (s.name.as_str(), s)).collect();
    ranking
        .groups
        .iter()
        .flat_map(|g| {
            g.members.iter().map(|m| RankedTreatment {
                treatment: m.clone(),
                rank: g.rank,
                summary: by_name[m.as_str()].summary(),
            })
        })
        .collect()
}

fn open_csv(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

fn parse_value(path: &Path, line: u64, column: &str, cell: &str) -> CliResult<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::data(format!(
            "{}: line {line}, column '{column}': '{cell}' is not a finite number",
            path.display()
        ))),
    }
}

/// Named series of values, in file order.
pub type Columns = Vec<(String, Vec<f64>)>;

/// Reads a wide CSV: one named column per series, empty cells skipped.
pub fn read_columns(path: &Path) -> CliResult<Columns> {
    let mut rdr = open_csv(path)?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        .clone();
    let mut cols: Vec<(String, Vec<f64>)> = header.iter().map(|h| (h.to_string(), Vec::new())).collect();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        for (j, cell) in rec.iter().enumerate() {
            if !cell.is_empty() {
                let v = parse_value(path, i as u64 + 2, &cols[j].0, cell)?;
                cols[j].1.push(v);
            }
        }
    }
    if cols.is_empty() {
        return Err(CliError::data(format!("{}: no columns", path.display())));
    }
    if let Some((name, _)) = cols.iter().find(|(_, v)| v.is_empty()) {
        return Err(CliError::data(format!(
            "{}: column '{name}' has no values",
            path.display()
        )));
    }
    Ok(cols)
}

/// Reads a long CSV with `context`, `method` and `score` columns, keeping
/// first-appearance order of contexts and methods.
pub fn read_contexts(path: &Path) -> CliResult<Vec<Context>> {
    let mut rdr = open_csv(path)?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::data(format!("{}: missing column '{name}'", path.display())))
    };
    let (ci, mi, si) = (col("context")?, col("method")?, col("score")?);
    let mut groups: Vec<(String, Columns)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let (c, m) = (&rec[ci], &rec[mi]);
        let v = parse_value(path, i as u64 + 2, "score", &rec[si])?;
        let gi = match groups.iter().position(|(id, _)| id == c) {
            Some(g) => g,
            None => {
                groups.push((c.to_string(), Vec::new()));
                groups.len() - 1
            }
        };
        let methods = &mut groups[gi].1;
        match methods.iter_mut().find(|(n, _)| n == m) {
            Some((_, vals)) => vals.push(v),
            None => methods.push((m.to_string(), vec![v])),
        }
    }
    if groups.is_empty() {
        return Err(CliError::data(format!("{}: no rows", path.display())));
    }
    groups
        .into_iter()
        .map(|(id, methods)| {
            let methods = methods
                .into_iter()
                .map(|(n, v)| SampleSet::new(n, v))
                .collect::<bellwether_core::Result<Vec<_>>>()?;
            Ok(Context { id, methods })
        })
        .collect()
}
