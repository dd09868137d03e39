//! Run configuration: defaults, then the `SCHEMA_FOCUS_CORPUS` environment
//! variable, then a `key=value` config file, then command-line flags.

use std::path::{Path, PathBuf};

use crate::baselines::{Bm25Params, CmmWeights, DemWeights, QueryTerms};
use crate::error::{Error, Result};
use crate::etr::{CvConfig, Distance, GeneratorParams};
use crate::ranking::RankParams;

pub const CORPUS_ENV: &str = "SCHEMA_FOCUS_CORPUS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub format: OutputFormat,
    pub inherit: bool,
    pub bm25: Bm25Params,
    pub cmm: CmmWeights,
    pub query: QueryTerms,
    pub dem: DemWeights,
    pub per_type: usize,
    pub retention: f64,
    pub noise: f64,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub tree_depths: Vec<Option<usize>>,
    pub knn_ks: Vec<usize>,
    pub distance: Distance,
    /// Required by the ETR commands; there is no default.
    pub seed: Option<u64>,
    pub top_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cv = CvConfig::with_seed(0);
        RunConfig {
            corpus: PathBuf::from("corpus"),
            format: OutputFormat::Csv,
            inherit: false,
            bm25: Bm25Params::default(),
            cmm: CmmWeights::default(),
            query: QueryTerms::default(),
            dem: DemWeights::default(),
            per_type: 50,
            retention: 0.8,
            noise: 0.02,
            outer_folds: cv.outer_folds,
            inner_folds: cv.inner_folds,
            tree_depths: cv.tree_depths,
            knn_ks: cv.knn_ks,
            distance: cv.distance,
            seed: None,
            top_k: 10,
        }
    }
}

pub const KEYS: &[&str] = &[
    "corpus",
    "format",
    "inherit",
    "k1",
    "b",
    "cmm_exact",
    "cmm_partial",
    "query",
    "dem_properties",
    "dem_subclasses",
    "dem_superclasses",
    "dem_siblings",
    "n",
    "rho",
    "eta",
    "outer_folds",
    "inner_folds",
    "tree_depths",
    "knn_k",
    "distance",
    "seed",
    "top_k",
];

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("{key}={value}: expected {expected}"))
}

fn real(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(key, value, "a number"))
}

fn in_range(key: &str, value: &str, ok: impl Fn(f64) -> bool, expected: &str) -> Result<f64> {
    let v = real(key, value)?;
    if ok(v) {
        Ok(v)
    } else {
        Err(bad(key, value, expected))
    }
}

fn count(key: &str, value: &str, min: usize) -> Result<usize> {
    match value.trim().parse::<usize>() {
        Ok(v) if v >= min => Ok(v),
        _ => Err(bad(key, value, &format!("an integer ≥ {min}"))),
    }
}

fn list<T>(key: &str, value: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let items: Option<Vec<T>> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect();
    match items {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(bad(key, value, "a non-empty comma-separated list")),
    }
}

impl RunConfig {
    /// Defaults, with the corpus root taken from the environment when set.
    pub fn from_env() -> Self {
        let mut c = RunConfig::default();
        if let Some(root) = std::env::var_os(CORPUS_ENV).filter(|v| !v.is_empty()) {
            c.corpus = PathBuf::from(root);
        }
        c
    }

    /// Applies one setting; unknown keys and out-of-range values are errors.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "corpus" => {
                if v.is_empty() {
                    return Err(bad(key, value, "a path"));
                }
                self.corpus = PathBuf::from(v);
            }
            "format" => {
                self.format = match v.to_ascii_lowercase().as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad(key, value, "csv or json")),
                }
            }
            "inherit" => {
                self.inherit = match v.to_ascii_lowercase().as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(bad(key, value, "true or false")),
                }
            }
            "k1" => self.bm25.k1 = in_range(key, v, |x| x >= 0.0, "a number ≥ 0")?,
            "b" => self.bm25.b = in_range(key, v, |x| (0.0..=1.0).contains(&x), "a number in [0, 1]")?,
            "cmm_exact" => self.cmm.exact = in_range(key, v, |x| x >= 0.0, "a number ≥ 0")?,
            "cmm_partial" => self.cmm.partial = in_range(key, v, |x| x >= 0.0, "a number ≥ 0")?,
            "query" => self.query = QueryTerms::parse(v),
            "dem_properties" => self.dem.properties = in_range(key, v, |x| x >= 0.0, "a number ≥ 0")?,
            "dem_subclasses" => self.dem.subclasses = in_range(key, v, |x| x >= 0.0, "a number ≥ 0")?,
            "dem_superclasses" => self.dem.superclasses = in_range(key, v, |x| x >= 0.0, "a number ≥ 0")?,
            "dem_siblings" => self.dem.siblings = in_range(key, v, |x| x >= 0.0, "a number ≥ 0")?,
            "n" => self.per_type = count(key, v, 1)?,
            "rho" => self.retention = in_range(key, v, |x| x > 0.0 && x <= 1.0, "a number in (0, 1]")?,
            "eta" => self.noise = in_range(key, v, |x| (0.0..1.0).contains(&x), "a number in [0, 1)")?,
            "outer_folds" => self.outer_folds = count(key, v, 2)?,
            "inner_folds" => self.inner_folds = count(key, v, 2)?,
            "tree_depths" => {
                self.tree_depths = list(key, v, |s| match s {
                    "unbounded" | "none" => Some(None),
                    _ => s.parse::<usize>().ok().map(Some),
                })?
            }
            "knn_k" => self.knn_ks = list(key, v, |s| s.parse::<usize>().ok().filter(|k| *k >= 1))?,
            "distance" => self.distance = v.parse()?,
            "seed" => self.seed = Some(v.parse().map_err(|_| bad(key, value, "an unsigned 64-bit integer"))?),
            "top_k" => self.top_k = count(key, v, 1)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown config key `{key}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` file: UTF-8, one setting per line, `#` starts
    /// a comment line, blank lines ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", i + 1)))?;
            self.apply(key.trim(), value)
                .map_err(|e| Error::Config(format!("config line {}: {}", i + 1, strip_prefix(&e))))?;
        }
        Ok(())
    }

    /// Defaults overlaid with the file at `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_file(path)?;
        Ok(c)
    }

    pub fn rank_params(&self) -> RankParams {
        RankParams {
            bm25: self.bm25,
            cmm: self.cmm,
            query: self.query.clone(),
            dem: self.dem,
        }
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("missing required flag --seed (ETR runs need an explicit seed)".into()))
    }

    pub fn generator(&self) -> Result<GeneratorParams> {
        GeneratorParams::new(self.per_type, self.retention, self.noise, self.require_seed()?)
    }

    pub fn cv(&self) -> Result<CvConfig> {
        Ok(CvConfig {
            outer_folds: self.outer_folds,
            inner_folds: self.inner_folds,
            tree_depths: self.tree_depths.clone(),
            knn_ks: self.knn_ks.clone(),
            distance: self.distance,
            seed: self.require_seed()?,
        })
    }
}

fn strip_prefix(e: &Error) -> String {
    let s = e.to_string();
    s.strip_prefix("config error: ").map(str::to_string).unwrap_or(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let mut c = RunConfig::default();
        c.apply_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        c.apply_str("# only a comment\n\n").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn flag_overrides_file() {
        let mut c = RunConfig::default();
        c.apply_str("eta=0.02\n").unwrap();
        c.apply("eta", "0.05").unwrap();
        assert_eq!(c.noise, 0.05);
    }

    #[test]
    fn range_and_unknown_errors() {
        let mut c = RunConfig::default();
        let e = c.apply_str("eta=1.5").unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("eta")), "{e}");
        assert!(c.apply_str("bogus=1").is_err());
        assert!(c.apply_str("novalue").is_err());
        assert!(c.apply("rho", "0").is_err());
        assert!(c.apply("knn_k", "0,1").is_err());
        assert!(c.apply("outer_folds", "1").is_err());
        assert!(c.apply("b", "nan").is_err());
    }

    #[test]
    fn lists_and_seed() {
        let mut c = RunConfig::default();
        c.apply_str("tree_depths = 1, unbounded\nknn_k=7\nseed=42\nquery=Person, Doc")
            .unwrap();
        assert_eq!(c.tree_depths, vec![Some(1), None]);
        assert_eq!(c.knn_ks, vec![7]);
        assert_eq!(c.cv().unwrap().seed, 42);
        assert_eq!(c.query.terms(), ["person", "doc"]);
    }

    #[test]
    fn seed_is_required() {
        let e = RunConfig::default().generator().unwrap_err();
        assert!(e.to_string().contains("--seed"));
    }
}
