use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Runtime,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {message}")]
    Csv { path: String, message: String },
    #[error("{path}: line {line} has {found} fields, expected {expected}")]
    RaggedRow {
        path: String,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}, column '{column}': '{value}' is not numeric")]
    NonNumeric {
        path: String,
        line: u64,
        column: String,
        value: String,
    },
    #[error("{path}: line {line}, column '{column}' is empty")]
    MissingValue { path: String, line: u64, column: String },
    #[error("{path}: class column '{column}' not found")]
    ClassColumnMissing { path: String, column: String },
    #[error("dataset '{0}' has no rows")]
    EmptyDataset(String),
    #[error("dataset '{dataset}': duplicate attribute '{attribute}'")]
    DuplicateAttribute { dataset: String, attribute: String },
    #[error("dataset '{dataset}': {message}")]
    InvalidDataset { dataset: String, message: String },
    #[error("invalid positive-class rule '{0}'")]
    InvalidRule(String),
    #[error("schema mismatch: dataset '{dataset}' differs at attribute '{attribute}'")]
    SchemaMismatch { dataset: String, attribute: String },
    #[error("dataset '{dataset}' is {found:?}, community expects {expected:?}")]
    MixedTask {
        dataset: String,
        expected: crate::data::TaskKind,
        found: crate::data::TaskKind,
    },
    #[error("{what} needs at least {needed} datasets, got {found}")]
    TooFewDatasets {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("dataset '{0}' has no version tag")]
    MissingVersion(String),
    #[error("version tags '{0}' and '{1}' are not comparable")]
    IncomparableVersions(String, String),
    #[error("project '{0}' needs at least two versions")]
    UnversionedProject(String),
    #[error("{op} requires a {expected:?} dataset")]
    WrongTask {
        op: &'static str,
        expected: crate::data::TaskKind,
    },
    #[error("dataset '{dataset}' has no {class} rows")]
    EmptyClass { dataset: String, class: &'static str },
    #[error("need at least {needed} rows to train, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("classification training data contains a single class")]
    SingleClass,
    #[error("strategy '{0}' was used before fit")]
    NotFitted(String),
    #[error("unknown strategy '{name}'; registered: {}", registered.join(", "))]
    UnknownStrategy { name: String, registered: Vec<String> },
    #[error("strategy '{0}' is reserved for an external plugin and is not registered")]
    ReservedStrategy(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("{what}: need at least {needed} values, got {found}")]
    TooFewValues {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("standardized accuracy undefined: all true values are identical")]
    UndefinedBaseline,
    #[error("history has {found} evaluations, monitor needs {needed}")]
    InsufficientHistory { needed: usize, found: usize },
    #[error("context '{0}' does not have the same method set as the first context")]
    InconsistentMethods(String),
    #[error("dataset '{0}' not found")]
    UnknownDataset(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::RaggedRow { .. }
            | Error::NonNumeric { .. }
            | Error::MissingValue { .. }
            | Error::ClassColumnMissing { .. }
            | Error::EmptyDataset(_)
            | Error::DuplicateAttribute { .. }
            | Error::InvalidDataset { .. }
            | Error::SchemaMismatch { .. }
            | Error::MixedTask { .. }
            | Error::TooFewDatasets { .. }
            | Error::MissingVersion(_)
            | Error::IncomparableVersions(..)
            | Error::UnversionedProject(_)
            | Error::UnknownDataset(_) => ErrorCategory::Data,
            Error::InvalidRule(_) | Error::UnknownStrategy { .. } | Error::ReservedStrategy(_) | Error::Config(_) => {
                ErrorCategory::Config
            }
            Error::Run { source, .. } => source.category(),
            _ => ErrorCategory::Runtime,
        }
    }
}
