use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Label;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

/// Maps a raw class value to a label, e.g. `bug > 0` or `> 0`.
///
/// The optional left-hand identifier names the class column; `value` is a
/// placeholder meaning "whatever the class column is".
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRule {
    pub column: Option<String>,
    pub op: CmpOp,
    pub threshold: f64,
}

impl Default for PositiveRule {
    fn default() -> Self {
        PositiveRule {
            column: None,
            op: CmpOp::Gt,
            threshold: 0.0,
        }
    }
}

impl PositiveRule {
    pub fn apply(&self, raw: f64) -> Label {
        if self.op.holds(raw, self.threshold) {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl FromStr for PositiveRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidRule(s.to_string());
        let text = s.trim();
        let op_start = text.find(['<', '>', '=', '!']).ok_or_else(bad)?;
        let column = text[..op_start].trim();
        let rest = &text[op_start..];
        let (op, width) = [
            (">=", CmpOp::Ge),
            ("<=", CmpOp::Le),
            ("==", CmpOp::Eq),
            ("!=", CmpOp::Ne),
            (">", CmpOp::Gt),
            ("<", CmpOp::Lt),
        ]
        .iter()
        .find(|(sym, _)| rest.starts_with(sym))
        .map(|(sym, op)| (*op, sym.len()))
        .ok_or_else(bad)?;
        let threshold: f64 = rest[width..].trim().parse().map_err(|_| bad())?;
        if !threshold.is_finite() {
            return Err(bad());
        }
        let column = match column {
            "" | "value" => None,
            c if c.chars().all(|ch| ch.is_alphanumeric() || "_-.$".contains(ch)) => Some(c.to_string()),
            _ => return Err(bad()),
        };
        Ok(PositiveRule { column, op, threshold })
    }
}

impl fmt::Display for PositiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let col = self.column.as_deref().unwrap_or("value");
        write!(f, "{col} {} {}", self.op.symbol(), self.threshold)
    }
}

impl Serialize for PositiveRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
