//! Entity type recognition: synthetic instances drawn around formal
//! context rows, a Gini tree, a k-NN classifier, nested cross-validation
//! and the Focus(K)/accuracy rank correlation.

mod correlation;
mod cv;
mod instances;
mod knn;
mod tree;

pub use correlation::{average_ranks, focus_accuracy_correlation, spearman, ModelCorrelation};
pub use cv::{nested_cv, stratified_folds, CvConfig, EtrReport, FoldResult, HyperParameter, ModelKind, ETR_CSV_HEADER};
pub use instances::{generate_instances, Features, GeneratorParams, Instance, InstanceSet};
pub use knn::{Distance, KnnModel};
pub use tree::DecisionTree;

use crate::error::Result;
use crate::fca::FormalContext;
use crate::schema::Schema;

/// Generates instances for `schema` and runs nested CV for one model.
pub fn run_etr(schema: &Schema, kind: ModelKind, generator: GeneratorParams, config: &CvConfig) -> Result<EtrReport> {
    let context = FormalContext::from_schema(schema);
    let set = generate_instances(&context, generator);
    nested_cv(&set, schema.name(), kind, config)
}
