use std::io::Write;
use std::path::Path;

use super::{FeatureMatrix, PositiveRule, ProjectDataset, Target, TaskKind};
use crate::error::{Error, Result};

/// How to interpret a dataset CSV.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub task: TaskKind,
    /// Defaults to `value > 0` for classification.
    pub positive_rule: Option<PositiveRule>,
    /// Defaults to the rule's column, then to the last CSV column.
    pub class_column: Option<String>,
    /// Columns that are read but ignored (identifiers, file names, ...).
    pub drop_columns: Vec<String>,
    /// Defaults to the file stem.
    pub name: Option<String>,
    pub version: Option<String>,
}

impl LoadOptions {
    pub fn classification() -> Self {
        LoadOptions {
            task: TaskKind::Classification,
            positive_rule: None,
            class_column: None,
            drop_columns: Vec::new(),
            name: None,
            version: None,
        }
    }

    pub fn regression() -> Self {
        LoadOptions {
            task: TaskKind::Regression,
            ..Self::classification()
        }
    }

    pub fn with_rule(mut self, rule: PositiveRule) -> Self {
        self.positive_rule = Some(rule);
        self
    }
}

fn parse_cell(path: &str, line: u64, column: &str, raw: &str) -> Result<f64> {
    let cell = raw.trim();
    if cell.is_empty() {
        return Err(Error::MissingValue {
            path: path.to_string(),
            line,
            column: column.to_string(),
        });
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumeric {
            path: path.to_string(),
            line,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<ProjectDataset> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::Headers)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => Error::Csv {
                path: shown.clone(),
                message: format!("{other:?}"),
            },
        })?;
    let csv_err = |e: csv::Error| Error::Csv {
        path: shown.clone(),
        message: e.to_string(),
    };
    let headers: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Csv {
            path: shown,
            message: "missing header row".into(),
        });
    }

    let rule_column = opts.positive_rule.as_ref().and_then(|r| r.column.clone());
    let class_column = match (&opts.class_column, &rule_column) {
        (Some(c), Some(r)) if c != r => {
            return Err(Error::Config(format!(
                "class column '{c}' conflicts with positive rule column '{r}'"
            )))
        }
        (Some(c), _) | (None, Some(c)) => c.clone(),
        (None, None) => headers.last().cloned().unwrap_or_default(),
    };
    let class_idx = headers
        .iter()
        .position(|h| *h == class_column)
        .ok_or_else(|| Error::ClassColumnMissing {
            path: shown.clone(),
            column: class_column.clone(),
        })?;
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| i != class_idx && !opts.drop_columns.contains(&headers[i]))
        .collect();
    let attributes: Vec<String> = feature_idx.iter().map(|&i| headers[i].clone()).collect();

    let mut values = Vec::new();
    let mut raw_class = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                path: shown,
                line,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for &i in &feature_idx {
            values.push(parse_cell(&shown, line, &headers[i], &record[i])?);
        }
        raw_class.push(parse_cell(&shown, line, &class_column, &record[class_idx])?);
    }

    let target = match opts.task {
        TaskKind::Classification => {
            let rule = opts.positive_rule.clone().unwrap_or_default();
            Target::Labels(raw_class.iter().map(|&v| rule.apply(v)).collect())
        }
        TaskKind::Regression => Target::Values(raw_class),
    };
    let name = opts.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| shown.clone())
    });
    ProjectDataset::new(
        name,
        opts.version.clone(),
        class_column,
        FeatureMatrix::from_flat(attributes, values),
        target,
    )
}

/// Writes features followed by the class column. Labels are written as 1/0,
/// so reloading under the default `> 0` rule reproduces them.
pub fn write_csv<W: Write>(dataset: &ProjectDataset, out: W) -> Result<()> {
    let io_err = |e: csv::Error| Error::Csv {
        path: dataset.label(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = dataset.attributes().iter().map(String::as_str).collect();
    header.push(dataset.class_name());
    w.write_record(&header).map_err(io_err)?;
    let mut record = Vec::with_capacity(header.len());
    for (i, row) in dataset.features().rows().enumerate() {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(match dataset.target() {
            Target::Labels(l) => if l[i].is_positive() { "1" } else { "0" }.to_string(),
            Target::Values(v) => v[i].to_string(),
        });
        w.write_record(&record).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Csv {
        path: dataset.label(),
        message: e.to_string(),
    })
}
