use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fca::FormalContext;

/// Packed binary attribute vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Features {
    len: usize,
    words: Vec<u64>,
}

impl Features {
    pub fn zeros(len: usize) -> Self {
        Features {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut f = Features::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            f.set(i, b);
        }
        f
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "attribute {i} out of range");
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "attribute {i} out of range");
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    fn zip_count(&self, other: &Features, op: impl Fn(u64, u64) -> u64) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| op(*a, *b).count_ones() as usize)
            .sum()
    }

    /// `1 − |x∧y| / |x∨y|`, defined as 0 when both vectors are all-zero.
    pub fn jaccard_distance(&self, other: &Features) -> f64 {
        let union = self.zip_count(other, |a, b| a | b);
        if union == 0 {
            return 0.0;
        }
        let inter = self.zip_count(other, |a, b| a & b);
        1.0 - inter as f64 / union as f64
    }

    /// Fraction of differing positions.
    pub fn hamming_distance(&self, other: &Features) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        self.zip_count(other, |a, b| a ^ b) as f64 / self.len as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: Features,
    /// Index into `InstanceSet::labels`.
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub per_type: usize,
    pub retention: f64,
    pub noise: f64,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(per_type: usize, retention: f64, noise: f64, seed: u64) -> Result<Self> {
        if per_type == 0 {
            return Err(Error::Config("instances per type must be at least 1".into()));
        }
        if !(retention > 0.0 && retention <= 1.0) {
            return Err(Error::Config(format!("retention must be in (0, 1], got {retention}")));
        }
        if !(0.0..1.0).contains(&noise) {
            return Err(Error::Config(format!("noise must be in [0, 1), got {noise}")));
        }
        Ok(GeneratorParams {
            per_type,
            retention,
            noise,
            seed,
        })
    }
}

/// Labelled binary instances. Labels are kept sorted, so comparing label
/// indices is comparing label strings.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSet {
    pub attributes: Vec<String>,
    pub labels: Vec<String>,
    pub instances: Vec<Instance>,
    pub params: Option<GeneratorParams>,
}

impl InstanceSet {
    /// Builds a set from explicit rows. Row vectors must all have
    /// `attributes.len()` entries.
    pub fn from_rows<S: Into<String>>(attributes: Vec<String>, rows: Vec<(Vec<bool>, S)>) -> Result<Self> {
        let rows: Vec<(Vec<bool>, String)> = rows.into_iter().map(|(v, l)| (v, l.into())).collect();
        let mut labels: Vec<String> = rows.iter().map(|(_, l)| l.clone()).collect();
        labels.sort();
        labels.dedup();
        let mut instances = Vec::with_capacity(rows.len());
        for (bits, label) in rows {
            if bits.len() != attributes.len() {
                return Err(Error::Validation(format!(
                    "instance has {} attributes, expected {}",
                    bits.len(),
                    attributes.len()
                )));
            }
            let label = labels.binary_search(&label).expect("collected above");
            instances.push(Instance {
                features: Features::from_bools(&bits),
                label,
            });
        }
        Ok(InstanceSet {
            attributes,
            labels,
            instances,
            params: None,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_name(&self, label: usize) -> &str {
        &self.labels[label]
    }
}

/// Draws `per_type` noisy copies of every context row.
///
/// Uses ChaCha8 seeded from `params.seed` (stream 0). One uniform `f64` is
/// drawn per cell, in object order, then instance index, then attribute
/// order: an owned attribute is kept when the draw is below `retention`, a
/// non-owned one is switched on when the draw is below `noise`.
pub fn generate_instances(context: &FormalContext, params: GeneratorParams) -> InstanceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let width = context.attributes().len();
    let mut instances = Vec::with_capacity(context.objects().len() * params.per_type);
    // objects are sorted, so object index == label index
    for (label, _) in context.objects().iter().enumerate() {
        let prototype = context.row(label);
        for _ in 0..params.per_type {
            let mut features = Features::zeros(width);
            for (a, &owned) in prototype.iter().enumerate() {
                let u: f64 = rng.gen();
                let on = if owned { u < params.retention } else { u < params.noise };
                if on {
                    features.set(a, true);
                }
            }
            instances.push(Instance { features, label });
        }
    }
    InstanceSet {
        attributes: context.attributes().to_vec(),
        labels: context.objects().to_vec(),
        instances,
        params: Some(params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> FormalContext {
        FormalContext::new(
            vec!["A".into(), "B".into()],
            vec!["p".into(), "q".into(), "r".into()],
            vec![true, true, false, false, false, true],
        )
        .unwrap()
    }

    #[test]
    fn degenerate_generator_copies_rows() {
        let set = generate_instances(&ctx(), GeneratorParams::new(7, 1.0, 0.0, 3).unwrap());
        assert_eq!(set.len(), 14);
        for inst in &set.instances {
            assert_eq!(inst.features.to_bools(), ctx().row(inst.label));
        }
        for label in 0..2 {
            assert_eq!(set.instances.iter().filter(|i| i.label == label).count(), 7);
        }
    }

    #[test]
    fn same_seed_same_set() {
        let p = GeneratorParams::new(20, 0.8, 0.1, 99).unwrap();
        assert_eq!(generate_instances(&ctx(), p), generate_instances(&ctx(), p));
        let q = GeneratorParams { seed: 100, ..p };
        assert_ne!(generate_instances(&ctx(), p), generate_instances(&ctx(), q));
    }

    #[test]
    fn retention_rate() {
        let c = FormalContext::new(vec!["A".into()], vec!["p".into()], vec![true]).unwrap();
        let set = generate_instances(&c, GeneratorParams::new(100_000, 0.8, 0.0, 5).unwrap());
        let kept = set.instances.iter().filter(|i| i.features.get(0)).count() as f64 / 1e5;
        assert!((kept - 0.8).abs() <= 0.01, "keep rate {kept}");
    }

    #[test]
    fn param_ranges() {
        assert!(GeneratorParams::new(0, 0.8, 0.0, 1).is_err());
        assert!(GeneratorParams::new(1, 0.0, 0.0, 1).is_err());
        assert!(GeneratorParams::new(1, 1.1, 0.0, 1).is_err());
        assert!(GeneratorParams::new(1, 1.0, 1.0, 1).is_err());
        assert!(GeneratorParams::new(1, 1.0, 0.99, 1).is_ok());
    }

    #[test]
    fn distances() {
        let x = Features::from_bools(&[true, true, false]);
        let y = Features::from_bools(&[false, true, true]);
        assert!((x.jaccard_distance(&y) - 2.0 / 3.0).abs() < 1e-15);
        let z = Features::zeros(3);
        assert_eq!(z.jaccard_distance(&Features::zeros(3)), 0.0);
        assert_eq!(x.hamming_distance(&y), 2.0 / 3.0);
        let mut wide = Features::zeros(130);
        wide.set(129, true);
        wide.set(0, true);
        assert_eq!(wide.count_ones(), 2);
        wide.set(0, false);
        assert!(!wide.get(0) && wide.get(129));
    }
}
