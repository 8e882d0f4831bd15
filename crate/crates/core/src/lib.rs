//! Bellwether discovery for software-analytics data.
//!
//! A *bellwether* is the one project in a community of same-schema datasets
//! whose data, used as-is to train a predictor, gives the best predictions
//! for the other projects. This crate finds bellwethers with a round-robin
//! holdout protocol, uses them as a baseline transfer learner, ranks
//! competing data sources with Scott-Knott clustering (bootstrap test plus
//! A12 effect size), and monitors a bellwether for degradation.

pub mod bellwether;
pub mod data;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
