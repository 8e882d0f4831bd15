use std::fmt;
use std::io::Write;
use std::path::Path;

use bellwether_core::{Error, ErrorCategory};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Error with the process exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.category() {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Runtime => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Flat projection of a result for the CSV format.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::runtime(format!("writing CSV: {e}"));
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        w.into_inner()
            .map_err(|e| CliError::runtime(format!("writing CSV: {e}")))
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.6}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// A command's result, both as nested JSON and as a flat table.
pub struct Output {
    pub result: serde_json::Value,
    pub table: Table,
    /// Plain-text rendering, used when no format is requested.
    pub text: Option<String>,
    /// Set when the report is complete but the command should still fail.
    pub failure: Option<CliError>,
}

impl Output {
    pub fn new<T: Serialize>(result: &T, table: Table) -> CliResult<Output> {
        let result = serde_json::to_value(result).map_err(|e| CliError::runtime(format!("serializing report: {e}")))?;
        Ok(Output {
            result,
            table,
            text: None,
            failure: None,
        })
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    pub result: &'a serde_json::Value,
}

pub fn render_json<C: Serialize>(command: &'static str, config: &C, result: &serde_json::Value) -> CliResult<Vec<u8>> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        tool: "bellwether",
        version: bellwether_core::VERSION,
        command,
        config,
        result,
    };
    let mut bytes =
        serde_json::to_vec_pretty(&env).map_err(|e| CliError::runtime(format!("serializing report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::runtime(format!("writing report: {e}")))
        }
    }
}
