//! Focus metrics for knowledge base schemas.
//!
//! A schema is a set of entity types, each described by a set of properties.
//! The crate scores how well a schema's properties discriminate its entity
//! types (cue validity), ranks entity types and whole schemas by that score,
//! compares the ranking against classic baselines, and runs an entity type
//! recognition experiment over the schema's formal context.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod etr;
pub mod fca;
pub mod metrics;
pub mod ranking;
pub mod schema;

pub use error::{Error, Result};
pub use metrics::{metric_report, MetricReport};
pub use schema::{Schema, SchemaBuilder, Validated};
