//! On-disk schema corpus.
//!
//! Layout under the root directory:
//!
//! ```text
//! manifest.json              {"entries": [{"name", "file", "hash"}]}
//! schemas/<name>.json        canonical JSON of each schema
//! cache/<hash>-<suite>.json  cached metric reports
//! ```
//!
//! Hashes are SHA-256 of the stored file bytes. The manifest is replaced
//! atomically (write to a temporary file, then rename).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{metric_report, MetricReport, METRIC_SUITE_VERSION};
use crate::schema::{parse_json, to_canonical_json, Schema};

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Relative to the corpus root.
    pub file: String,
    pub hash: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Manifest {
    entries: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CachedReport {
    hash: String,
    suite_version: String,
    inherit: bool,
    report: MetricReport,
}

#[derive(Debug)]
pub struct Corpus {
    root: PathBuf,
    manifest: Manifest,
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(format!("renaming to {}", path.display()), e))
}

/// Names double as file names, so they are restricted to
/// `[A-Za-z0-9._-]` and may not start with a dot.
pub fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "invalid schema name `{name}` (use letters, digits, `.`, `_`, `-`)"
        )))
    }
}

impl Corpus {
    /// Opens an existing corpus directory. A missing manifest reads as an
    /// empty corpus.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(Error::io(
                format!("opening corpus {}", root.display()),
                std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
            ));
        }
        let path = root.join(MANIFEST);
        let manifest = if path.exists() {
            serde_json::from_slice(&read(&path)?)?
        } else {
            Manifest::default()
        };
        Ok(Corpus { root, manifest })
    }

    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(format!("creating {}", root.display()), e))?;
        Self::open(root)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Entries in insertion order.
    pub fn list(&self) -> &[ManifestEntry] {
        &self.manifest.entries
    }

    pub fn entry(&self, name: &str) -> Option<&ManifestEntry> {
        self.manifest.entries.iter().find(|e| e.name == name)
    }

    /// Stores `schema` under its own name.
    pub fn add(&mut self, schema: &Schema) -> Result<ManifestEntry> {
        let name = schema.name();
        check_name(name)?;
        // pick up concurrent additions before writing
        let current = Corpus::open(self.root.clone())?;
        self.manifest = current.manifest;
        if self.entry(name).is_some() {
            return Err(Error::NameCollision(name.to_string()));
        }
        let dir = self.root.join("schemas");
        fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let file = format!("schemas/{name}.json");
        let bytes = to_canonical_json(schema);
        write_atomic(&self.root.join(&file), bytes.as_bytes())?;
        let entry = ManifestEntry {
            name: name.to_string(),
            file,
            hash: content_hash(bytes.as_bytes()),
        };
        self.manifest.entries.push(entry.clone());
        self.save_manifest()?;
        Ok(entry)
    }

    fn save_manifest(&self) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        write_atomic(&self.root.join(MANIFEST), text.as_bytes())
    }

    fn verified_bytes(&self, entry: &ManifestEntry) -> Result<Vec<u8>> {
        let path = self.root.join(&entry.file);
        let bytes = read(&path)?;
        if content_hash(&bytes) != entry.hash {
            return Err(Error::StaleManifest { path });
        }
        Ok(bytes)
    }

    /// Loads a schema, verifying its content hash first.
    pub fn load(&self, name: &str) -> Result<Schema> {
        let entry = self.entry(name).ok_or_else(|| Error::UnknownSchema(name.to_string()))?;
        let bytes = self.verified_bytes(entry)?;
        Ok(parse_json(&bytes)?.schema.with_name(name))
    }

    pub fn load_all(&self) -> Result<Vec<Schema>> {
        self.manifest.entries.iter().map(|e| self.load(&e.name)).collect()
    }

    /// Metric report for a stored schema, served from the cache when the
    /// cached entry matches the current content hash and metric suite.
    pub fn metric_report(&self, name: &str, inherit: bool) -> Result<MetricReport> {
        let entry = self.entry(name).ok_or_else(|| Error::UnknownSchema(name.to_string()))?;
        let suffix = if inherit { "-inherit" } else { "" };
        let cache_path = self
            .root
            .join("cache")
            .join(format!("{}-{METRIC_SUITE_VERSION}{suffix}.json", entry.hash));
        if let Ok(bytes) = fs::read(&cache_path) {
            if let Ok(cached) = serde_json::from_slice::<CachedReport>(&bytes) {
                if cached.hash == entry.hash
                    && cached.suite_version == METRIC_SUITE_VERSION
                    && cached.inherit == inherit
                    && cached.report.schema.name == name
                {
                    // the schema file must still match the manifest
                    self.verified_bytes(entry)?;
                    return Ok(cached.report);
                }
            }
        }
        let mut schema = self.load(name)?;
        if inherit {
            schema = schema.inherit_properties();
        }
        let report = metric_report(&schema);
        let cached = CachedReport {
            hash: entry.hash.clone(),
            suite_version: METRIC_SUITE_VERSION.to_string(),
            inherit,
            report,
        };
        // a failed cache write is not an error for the caller
        if fs::create_dir_all(cache_path.parent().expect("has parent")).is_ok() {
            let _ = write_atomic(&cache_path, &serde_json::to_vec(&cached).expect("serializes"));
        }
        Ok(cached.report)
    }
}
