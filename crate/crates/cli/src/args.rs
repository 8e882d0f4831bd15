use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "bellwether",
    version,
    about = "Find, use and monitor bellwether projects in a data community"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Community manifest (TOML).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Repeated runs per pair.
    #[arg(long, global = true, default_value_t = 30)]
    pub repeats: usize,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value = "direct")]
    pub strategy: String,

    /// Training class ratio, positives:negatives.
    #[arg(long, global = true, default_value = "1:2")]
    pub ratio: String,

    /// Trees per forest.
    #[arg(long, global = true, default_value_t = 100)]
    pub trees: usize,

    #[arg(long, global = true, default_value_t = 0.99)]
    pub confidence: f64,

    /// Minimum A12 for two groups to count as different.
    #[arg(long, global = true, default_value_t = 0.6)]
    pub effect_threshold: f64,

    /// Bootstrap resamples per test.
    #[arg(long, global = true, default_value_t = 512)]
    pub bootstrap: usize,

    /// Worker threads; 0 uses every available processor.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Report format; `validate` prints text lines unless one is given.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rank every project as a training source with the round-robin holdout protocol.
    Discover,
    /// Apply a source project to targets.
    Transfer {
        /// Source dataset (label `name@version` or a unique project name).
        #[arg(long)]
        source: String,
        /// Targets; defaults to every other dataset.
        #[arg(long)]
        target: Vec<String>,
    },
    /// Check a history of evaluations for a significant drop.
    Monitor {
        /// CSV with one column of repeat scores per evaluation, oldest first.
        #[arg(long, conflicts_with = "bellwether")]
        history: Option<PathBuf>,
        /// Build the history by transferring this dataset to the manifest's
        /// datasets in order.
        #[arg(long)]
        bellwether: Option<String>,
        #[arg(long, default_value_t = 5)]
        baseline: usize,
        #[arg(long, default_value_t = 5)]
        recent: usize,
        /// Report the status after every evaluation instead of only the last.
        #[arg(long)]
        stream: bool,
    },
    /// Win/tie/loss counts of methods ranked per context.
    CompareMethods {
        /// Long CSV with columns context, method, score.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lower_is_better: bool,
    },
    /// Newest version of each project: bellwether versus its own previous version.
    WithinVsBellwether {
        /// Use this project as the bellwether instead of discovering one.
        #[arg(long)]
        bellwether: Option<String>,
    },
    /// Smallest union of a project's versions that predicts as well as all of them.
    Incremental {
        #[arg(long)]
        project: String,
        /// Targets; defaults to every dataset of the other projects.
        #[arg(long)]
        target: Vec<String>,
    },
    /// Scott-Knott ranking of treatments.
    Rank {
        /// CSV with one column of values per treatment; short columns may end in empty cells.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lower_is_better: bool,
    },
    /// Most important attributes of a forest trained on each dataset.
    Instability {
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Mark this dataset or project as the bellwether.
        #[arg(long)]
        bellwether: Option<String>,
    },
    /// Load and check every dataset without training.
    Validate,
    /// Write a synthetic community with a planted bellwether.
    Synth {
        /// Directory for the manifest and CSV files.
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 200)]
        rows: usize,
        #[arg(long, default_value_t = 5)]
        attributes: usize,
        #[arg(long, default_value_t = 3)]
        noisy_projects: usize,
        #[arg(long, default_value_t = 0.35)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        versions: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Discover => "discover",
            Command::Transfer { .. } => "transfer",
            Command::Monitor { .. } => "monitor",
            Command::CompareMethods { .. } => "compare-methods",
            Command::WithinVsBellwether { .. } => "within-vs-bellwether",
            Command::Incremental { .. } => "incremental",
            Command::Rank { .. } => "rank",
            Command::Instability { .. } => "instability",
            Command::Validate => "validate",
            Command::Synth { .. } => "synth",
        }
    }
}
