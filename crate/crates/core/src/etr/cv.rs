//! Nested, stratified cross-validation of the tree and k-NN classifiers.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instances::{GeneratorParams, InstanceSet};
use super::knn::{Distance, KnnModel};
use super::tree::DecisionTree;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tree,
    Knn,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tree => "tree",
            ModelKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tree" => Ok(ModelKind::Tree),
            "knn" => Ok(ModelKind::Knn),
            _ => Err(Error::Config(format!("unknown model `{s}` (expected tree|knn)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperParameter {
    /// `None` = unbounded.
    MaxDepth(Option<usize>),
    K(usize),
}

impl fmt::Display for HyperParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperParameter::MaxDepth(Some(d)) => write!(f, "max_depth={d}"),
            HyperParameter::MaxDepth(None) => write!(f, "max_depth=unbounded"),
            HyperParameter::K(k) => write!(f, "k={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub tree_depths: Vec<Option<usize>>,
    pub knn_ks: Vec<usize>,
    pub distance: Distance,
    pub seed: u64,
}

impl CvConfig {
    pub fn with_seed(seed: u64) -> Self {
        CvConfig {
            outer_folds: 50,
            inner_folds: 5,
            tree_depths: vec![Some(2), Some(4), Some(8), None],
            knn_ks: vec![1, 3, 5],
            distance: Distance::Jaccard,
            seed,
        }
    }

    pub fn grid(&self, kind: ModelKind) -> Vec<HyperParameter> {
        match kind {
            ModelKind::Tree => self.tree_depths.iter().map(|d| HyperParameter::MaxDepth(*d)).collect(),
            ModelKind::Knn => self.knn_ks.iter().map(|k| HyperParameter::K(*k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub chosen: HyperParameter,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtrReport {
    pub schema: String,
    pub model: ModelKind,
    pub seed: u64,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub distance: Option<Distance>,
    pub generator: Option<GeneratorParams>,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub warnings: Vec<String>,
}

pub const ETR_CSV_HEADER: [&str; 7] = ["schema", "model", "fold", "n_train", "n_test", "chosen", "accuracy"];

impl EtrReport {
    /// Appends one row per outer fold plus a `MEAN` row.
    pub fn write_csv_rows<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> csv::Result<()> {
        for f in &self.folds {
            w.write_record([
                self.schema.clone(),
                self.model.to_string(),
                f.fold.to_string(),
                f.n_train.to_string(),
                f.n_test.to_string(),
                f.chosen.to_string(),
                format!("{:.6}", f.accuracy),
            ])?;
        }
        w.write_record([
            self.schema.clone(),
            self.model.to_string(),
            "MEAN".into(),
            String::new(),
            String::new(),
            String::new(),
            format!("{:.6}", self.mean_accuracy),
        ])
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(ETR_CSV_HEADER).expect("in-memory write");
        self.write_csv_rows(&mut w).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializes");
        s.push('\n');
        s
    }
}

/// Splits `rows` into `n_folds` folds after a seeded shuffle. Labels with at
/// least `n_folds` rows are dealt round-robin; the remaining rows are pooled
/// and dealt afterwards, continuing the same counter, so fold sizes differ
/// by at most one.
pub fn stratified_folds(
    set: &InstanceSet,
    rows: &[usize],
    n_folds: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<usize>>, Vec<String>) {
    let mut shuffled = rows.to_vec();
    shuffled.shuffle(rng);
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); set.labels.len()];
    for &r in &shuffled {
        by_label[set.instances[r].label].push(r);
    }
    let mut folds = vec![Vec::new(); n_folds];
    let mut warnings = Vec::new();
    let mut small = vec![false; set.labels.len()];
    let mut next = 0usize;
    for (label, members) in by_label.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < n_folds {
            warnings.push(format!(
                "label `{}` has {} instances, fewer than {n_folds} folds; assigned unstratified",
                set.labels[label],
                members.len()
            ));
            small[label] = true;
            continue;
        }
        for &r in members {
            folds[next % n_folds].push(r);
            next += 1;
        }
    }
    for r in shuffled.into_iter().filter(|&r| small[set.instances[r].label]) {
        folds[next % n_folds].push(r);
        next += 1;
    }
    (folds, warnings)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Accuracy on `test` of a model trained on `train`, for every grid point.
fn grid_accuracies(
    set: &InstanceSet,
    kind: ModelKind,
    grid: &[HyperParameter],
    distance: Distance,
    train: &[usize],
    test: &[usize],
) -> Vec<f64> {
    if test.is_empty() {
        return vec![0.0; grid.len()];
    }
    let mut correct = vec![0usize; grid.len()];
    match kind {
        ModelKind::Tree => {
            for (slot, hp) in correct.iter_mut().zip(grid) {
                let HyperParameter::MaxDepth(depth) = *hp else {
                    unreachable!("tree grid holds depths")
                };
                let tree = DecisionTree::fit_rows(set, train, depth);
                *slot = test
                    .iter()
                    .filter(|&&r| tree.predict(&set.instances[r].features) == set.instances[r].label)
                    .count();
            }
        }
        ModelKind::Knn => {
            let ks: Vec<usize> = grid
                .iter()
                .map(|hp| match *hp {
                    HyperParameter::K(k) => k,
                    HyperParameter::MaxDepth(_) => unreachable!("knn grid holds k values"),
                })
                .collect();
            let model = KnnModel::fit_rows(set, train, 1, distance);
            for &r in test {
                let preds = model.predict_for_each_k(&set.instances[r].features, &ks);
                for (slot, p) in correct.iter_mut().zip(preds) {
                    if p == set.instances[r].label {
                        *slot += 1;
                    }
                }
            }
        }
    }
    correct.into_iter().map(|c| c as f64 / test.len() as f64).collect()
}

fn complement(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != held_out)
        .flat_map(|(_, f)| f.iter().copied())
        .collect();
    rows.sort_unstable();
    rows
}

/// Picks the grid point with the highest mean inner-fold accuracy (ties go
/// to the earlier grid point).
fn select(
    set: &InstanceSet,
    kind: ModelKind,
    grid: &[HyperParameter],
    config: &CvConfig,
    train: &[usize],
    rng: &mut ChaCha8Rng,
) -> HyperParameter {
    let inner = config.inner_folds.min(train.len());
    if grid.len() == 1 || inner < 2 {
        return grid[0];
    }
    let (folds, _) = stratified_folds(set, train, inner, rng);
    let mut totals = vec![0.0; grid.len()];
    for i in 0..inner {
        let inner_train = complement(&folds, i);
        let acc = grid_accuracies(set, kind, grid, config.distance, &inner_train, &folds[i]);
        for (t, a) in totals.iter_mut().zip(acc) {
            *t += a;
        }
    }
    let mut best = 0;
    for (i, t) in totals.iter().enumerate() {
        if *t / inner as f64 > totals[best] / inner as f64 {
            best = i;
        }
    }
    grid[best]
}

/// Nested cross-validation. Outer folds run in parallel; each uses its own
/// ChaCha8 stream (outer shuffle: stream 1, inner shuffle of fold `f`:
/// stream `2 + f`), so the report does not depend on scheduling.
pub fn nested_cv(set: &InstanceSet, schema: &str, kind: ModelKind, config: &CvConfig) -> Result<EtrReport> {
    let grid = config.grid(kind);
    if grid.is_empty() {
        return Err(Error::Config(format!("empty hyperparameter grid for {kind}")));
    }
    if grid.iter().any(|hp| matches!(hp, HyperParameter::K(0))) {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if config.outer_folds < 2 {
        return Err(Error::Config("outer folds must be at least 2".into()));
    }
    if config.inner_folds < 2 {
        return Err(Error::Config("inner folds must be at least 2".into()));
    }
    if config.outer_folds > set.len() {
        return Err(Error::Config(format!(
            "{} outer folds but only {} instances",
            config.outer_folds,
            set.len()
        )));
    }

    let all: Vec<usize> = (0..set.len()).collect();
    let (folds, warnings) = stratified_folds(set, &all, config.outer_folds, &mut rng_for(config.seed, 1));

    let results: Vec<FoldResult> = (0..config.outer_folds)
        .into_par_iter()
        .map(|f| {
            let train = complement(&folds, f);
            let mut test = folds[f].clone();
            test.sort_unstable();
            let mut rng = rng_for(config.seed, 2 + f as u64);
            let chosen = select(set, kind, &grid, config, &train, &mut rng);
            let accuracy = grid_accuracies(set, kind, &[chosen], config.distance, &train, &test)[0];
            FoldResult {
                fold: f,
                n_train: train.len(),
                n_test: test.len(),
                chosen,
                accuracy,
            }
        })
        .collect();

    let mean_accuracy = results.iter().map(|r| r.accuracy).sum::<f64>() / results.len() as f64;
    Ok(EtrReport {
        schema: schema.to_string(),
        model: kind,
        seed: config.seed,
        outer_folds: config.outer_folds,
        inner_folds: config.inner_folds,
        distance: (kind == ModelKind::Knn).then_some(config.distance),
        generator: set.params,
        folds: results,
        mean_accuracy,
        warnings,
    })
}
