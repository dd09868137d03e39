use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::instances::{Features, InstanceSet};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Jaccard,
    Hamming,
}

impl Distance {
    pub fn between(self, x: &Features, y: &Features) -> f64 {
        match self {
            Distance::Jaccard => x.jaccard_distance(y),
            Distance::Hamming => x.hamming_distance(y),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Jaccard => "jaccard",
            Distance::Hamming => "hamming",
        })
    }
}

impl FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "jaccard" => Ok(Distance::Jaccard),
            "hamming" => Ok(Distance::Hamming),
            _ => Err(Error::Config(format!(
                "unknown distance `{s}` (expected jaccard|hamming)"
            ))),
        }
    }
}

/// Lazy k-NN: stores its training rows.
#[derive(Debug, Clone)]
pub struct KnnModel<'a> {
    set: &'a InstanceSet,
    rows: Vec<usize>,
    k: usize,
    distance: Distance,
}

impl<'a> KnnModel<'a> {
    pub fn fit(set: &'a InstanceSet, k: usize, distance: Distance) -> Self {
        Self::fit_rows(set, &(0..set.len()).collect::<Vec<_>>(), k, distance)
    }

    pub fn fit_rows(set: &'a InstanceSet, rows: &[usize], k: usize, distance: Distance) -> Self {
        assert!(k >= 1, "k must be at least 1");
        assert!(!rows.is_empty(), "training set must not be empty");
        KnnModel {
            set,
            rows: rows.to_vec(),
            k,
            distance,
        }
    }

    /// Training rows ordered by distance to `x`, ties by lower instance
    /// index.
    fn neighbours(&self, x: &Features) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .rows
            .iter()
            .map(|&r| (self.distance.between(x, &self.set.instances[r].features), r))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.into_iter().map(|(_, r)| r).collect()
    }

    fn vote(&self, neighbours: &[usize]) -> usize {
        let mut counts = vec![0usize; self.set.labels.len()];
        for &r in neighbours {
            counts[self.set.instances[r].label] += 1;
        }
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        best
    }

    pub fn predict(&self, x: &Features) -> usize {
        let n = self.neighbours(x);
        self.vote(&n[..self.k.min(n.len())])
    }

    /// Predictions for several `k` from one neighbour ordering.
    pub fn predict_for_each_k(&self, x: &Features, ks: &[usize]) -> Vec<usize> {
        let n = self.neighbours(x);
        ks.iter().map(|&k| self.vote(&n[..k.max(1).min(n.len())])).collect()
    }
}
