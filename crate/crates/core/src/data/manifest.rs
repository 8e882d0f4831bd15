//! Community manifests.
//!
//! ```toml
//! community = "apache"
//! task = "classification"
//! positive_rule = "bug > 0"
//! class_column = "bug"
//! drop_columns = ["name"]
//!
//! [[dataset]]
//! name = "ant"
//! version = "1.7"
//! path = "ant-1.7.csv"
//! ```
//!
//! Dataset paths are resolved relative to the manifest's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_csv, make_community, Community, LoadOptions, PositiveRule, ProjectDataset, TaskKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    #[serde(default)]
    pub version: Option<String>,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub community: String,
    pub task: TaskKind,
    #[serde(default)]
    pub positive_rule: Option<String>,
    #[serde(default)]
    pub class_column: Option<String>,
    #[serde(default)]
    pub drop_columns: Vec<String>,
    #[serde(rename = "dataset", default)]
    pub datasets: Vec<ManifestEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut m = Manifest::from_toml(&text)?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn from_toml(text: &str) -> Result<Manifest> {
        let m: Manifest = toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
        if m.task == TaskKind::Regression && m.positive_rule.is_some() {
            return Err(Error::Config("positive_rule only applies to classification".into()));
        }
        m.rule()?;
        Ok(m)
    }

    pub fn rule(&self) -> Result<Option<PositiveRule>> {
        self.positive_rule.as_deref().map(str::parse).transpose()
    }

    fn options_for(&self, entry: &ManifestEntry) -> Result<LoadOptions> {
        Ok(LoadOptions {
            task: self.task,
            positive_rule: self.rule()?,
            class_column: self.class_column.clone(),
            drop_columns: self.drop_columns.clone(),
            name: Some(entry.name.clone()),
            version: entry.version.clone(),
        })
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }

    pub fn load_dataset(&self, entry: &ManifestEntry) -> Result<ProjectDataset> {
        load_csv(self.resolve(entry), &self.options_for(entry)?)
    }

    pub fn load_community(&self) -> Result<Community> {
        let datasets = self
            .datasets
            .iter()
            .map(|e| self.load_dataset(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(make_community(&self.community, datasets, self.task)?.with_positive_rule(self.rule()?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetDiagnostic {
    pub dataset: String,
    pub ok: bool,
    pub rows: Option<usize>,
    pub attributes: Option<usize>,
    pub positives: Option<usize>,
    pub duplicate_rows: Option<usize>,
    pub constant_columns: Vec<String>,
    pub error: Option<String>,
}

impl DatasetDiagnostic {
    /// One human-readable line, e.g. `OK wct: 25 rows, 12 attributes, positive 72.0%`.
    pub fn line(&self) -> String {
        if let Some(e) = &self.error {
            return format!("ERROR {}: {e}", self.dataset);
        }
        let mut s = format!(
            "OK {}: {} rows, {} attributes",
            self.dataset,
            self.rows.unwrap_or(0),
            self.attributes.unwrap_or(0)
        );
        if let (Some(p), Some(n)) = (self.positives, self.rows) {
            s.push_str(&format!(", {}", balance_text(p, n)));
        }
        if let Some(d) = self.duplicate_rows.filter(|&d| d > 0) {
            s.push_str(&format!(", {d} duplicate rows"));
        }
        if !self.constant_columns.is_empty() {
            s.push_str(&format!(", constant: {}", self.constant_columns.join(" ")));
        }
        s
    }
}

/// `positive 72.0%`
pub fn balance_text(positives: usize, rows: usize) -> String {
    let pct = if rows == 0 {
        0.0
    } else {
        100.0 * positives as f64 / rows as f64
    };
    format!("positive {pct:.1}%")
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub community: String,
    pub datasets: Vec<DatasetDiagnostic>,
    pub schema_ok: bool,
    pub schema_error: Option<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.schema_ok && self.datasets.iter().all(|d| d.ok)
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.datasets.iter().map(DatasetDiagnostic::line).collect();
        out.push(match &self.schema_error {
            None => format!("schema OK ({} datasets)", self.datasets.len()),
            Some(e) => format!("schema ERROR: {e}"),
        });
        out
    }
}

/// Loads and checks every dataset of a manifest without training anything.
pub fn validate_manifest(manifest: &Manifest) -> ValidationReport {
    let mut loaded = Vec::new();
    let mut diagnostics = Vec::new();
    for entry in &manifest.datasets {
        let label = match &entry.version {
            Some(v) => format!("{}@{v}", entry.name),
            None => entry.name.clone(),
        };
        match manifest.load_dataset(entry) {
            Ok(d) => {
                diagnostics.push(DatasetDiagnostic {
                    dataset: label,
                    ok: true,
                    rows: Some(d.n_rows()),
                    attributes: Some(d.attributes().len()),
                    positives: d.positives(),
                    duplicate_rows: Some(d.duplicate_rows()),
                    constant_columns: d.constant_columns(),
                    error: None,
                });
                loaded.push(d);
            }
            Err(e) => diagnostics.push(DatasetDiagnostic {
                dataset: label,
                ok: false,
                rows: None,
                attributes: None,
                positives: None,
                duplicate_rows: None,
                constant_columns: Vec::new(),
                error: Some(e.to_string()),
            }),
        }
    }
    let schema_error = if loaded.is_empty() {
        Some("no loadable datasets".to_string())
    } else {
        make_community(&manifest.community, loaded, manifest.task)
            .err()
            .map(|e| e.to_string())
    };
    ValidationReport {
        community: manifest.community.clone(),
        datasets: diagnostics,
        schema_ok: schema_error.is_none(),
        schema_error,
    }
}
