//! Entity-type rankings, schema rankings, schema tags and the top-k
//! accuracy comparison against reference rankings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{self, Bm25Params, CmmWeights, DemWeights, QueryTerms};
use crate::error::{Error, Result};
use crate::metrics::{self, fmt6, CueIndex};
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub id: String,
    pub label: String,
    pub score: f64,
}

/// Entries sorted by descending score, ties broken by ascending id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    schema: String,
    metric: String,
    entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn new(schema: &str, metric: &str, entries: Vec<(String, String, f64)>) -> Self {
        let mut entries: Vec<RankedEntry> = entries
            .into_iter()
            .map(|(id, label, score)| RankedEntry { id, label, score })
            .collect();
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        entries.dedup_by(|a, b| a.id == b.id);
        RankedList {
            schema: schema.to_string(),
            metric: metric.to_string(),
            entries,
        }
    }

    pub fn schema(&self) -> &str {
        &self.schema
    }

    pub fn metric(&self) -> &str {
        &self.metric
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn truncated(mut self, k: usize) -> Self {
        self.entries.truncate(k);
        self
    }

    /// `rank,id,label,score` with 1-based ranks and six-decimal scores.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rank", "id", "label", "score"])
            .expect("in-memory write");
        for (i, e) in self.entries.iter().enumerate() {
            w.write_record([&(i + 1).to_string(), &e.id, &e.label, &fmt6(e.score)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Focus,
    Tfidf,
    Bm25,
    Cmm,
    Dem,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Focus, Metric::Tfidf, Metric::Bm25, Metric::Cmm, Metric::Dem];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Focus => "focus",
            Metric::Tfidf => "tfidf",
            Metric::Bm25 => "bm25",
            Metric::Cmm => "cmm",
            Metric::Dem => "dem",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}` (expected focus|tfidf|bm25|cmm|dem)")))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankParams {
    pub bm25: Bm25Params,
    pub cmm: CmmWeights,
    pub query: QueryTerms,
    pub dem: DemWeights,
}

pub fn focus_rank(schema: &Schema) -> RankedList {
    let index = CueIndex::new(schema);
    let entries = schema
        .entity_types()
        .iter()
        .map(|e| {
            let f = index.focus_e(&e.id).expect("entity from schema");
            (e.id.clone(), e.label.clone(), f)
        })
        .collect();
    RankedList::new(schema.name(), "focus", entries)
}

pub fn rank_entity_types(schema: &Schema, metric: Metric, params: &RankParams) -> RankedList {
    match metric {
        Metric::Focus => focus_rank(schema),
        Metric::Tfidf => baselines::tfidf_rank(schema),
        Metric::Bm25 => baselines::bm25_rank(schema, params.bm25),
        Metric::Cmm => baselines::cmm_rank(schema, &params.query, params.cmm),
        Metric::Dem => baselines::dem_rank(schema, params.dem),
    }
}

/// Entity ids judged relevant for one schema. Treated as an unordered set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRanking {
    pub schema: String,
    pub entities: Vec<String>,
    /// CMM query terms for this schema; falls back to the global query.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<Vec<String>>,
}

impl ReferenceRanking {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn check_against(&self, schema: &Schema) -> Result<()> {
        if let Some(missing) = self.entities.iter().find(|id| schema.entity(id).is_none()) {
            return Err(Error::Validation(format!(
                "reference for `{}` names unknown entity type `{missing}`",
                self.schema
            )));
        }
        Ok(())
    }
}

/// `|top-min(k,|ranked|) ∩ ref| / min(k, |ref|)`.
pub fn topk_overlap_accuracy(ranked: &RankedList, reference: &ReferenceRanking, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let reference: BTreeSet<&str> = reference.entities.iter().map(String::as_str).collect();
    if reference.is_empty() {
        return Err(Error::UndefinedMetric(
            "top-k accuracy against an empty reference".into(),
        ));
    }
    let hits = ranked
        .entries()
        .iter()
        .take(k)
        .filter(|e| reference.contains(e.id.as_str()))
        .count();
    Ok(hits as f64 / k.min(reference.len()) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub schema: String,
    /// Accuracy per metric in `Metric::ALL` order.
    pub accuracy: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub k: usize,
    pub rows: Vec<ComparisonRow>,
    /// Per-metric arithmetic mean over `rows`; `None` when no rows exist.
    pub means: Option<[f64; 5]>,
    /// Schemas excluded from the means, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl ComparisonTable {
    pub fn mean(&self, metric: Metric) -> Option<f64> {
        let i = Metric::ALL.iter().position(|m| *m == metric).expect("known metric");
        self.means.map(|m| m[i])
    }

    /// Header `schema,focus,tfidf,bm25,cmm,dem`, one row per schema in name
    /// order and a final `MEAN` row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["schema"];
        header.extend(Metric::ALL.iter().map(|m| m.name()));
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.schema.clone()];
            rec.extend(row.accuracy.iter().map(|v| fmt6(*v)));
            w.write_record(&rec).expect("in-memory write");
        }
        let mut rec = vec!["MEAN".to_string()];
        match self.means {
            Some(m) => rec.extend(m.iter().map(|v| fmt6(*v))),
            None => rec.extend(std::iter::repeat_n("NA".to_string(), 5)),
        }
        w.write_record(&rec).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Scores every ranker on every schema that has a reference ranking.
/// Schemas without a usable reference (missing, empty, or naming unknown
/// entity types) and references without a schema are listed in `skipped`
/// and left out of the means.
pub fn compare_rankers(
    schemas: &[Schema],
    references: &[ReferenceRanking],
    k: usize,
    params: &RankParams,
) -> Result<ComparisonTable> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let by_name: BTreeMap<&str, &ReferenceRanking> = references.iter().map(|r| (r.schema.as_str(), r)).collect();
    let mut ordered: Vec<&Schema> = schemas.iter().collect();
    ordered.sort_by(|a, b| a.name().cmp(b.name()));

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for schema in ordered {
        let Some(reference) = by_name.get(schema.name()) else {
            skipped.push((schema.name().to_string(), "no reference ranking".to_string()));
            continue;
        };
        let mut local = params.clone();
        if let Some(q) = &reference.query {
            local.query = QueryTerms::new(q);
        }
        let scored = reference.check_against(schema).and_then(|()| {
            let mut accuracy = [0.0; 5];
            for (slot, metric) in accuracy.iter_mut().zip(Metric::ALL) {
                let ranked = rank_entity_types(schema, metric, &local);
                *slot = topk_overlap_accuracy(&ranked, reference, k)?;
            }
            Ok(accuracy)
        });
        match scored {
            Ok(accuracy) => rows.push(ComparisonRow {
                schema: schema.name().to_string(),
                accuracy,
            }),
            Err(e) => skipped.push((schema.name().to_string(), e.to_string())),
        }
    }
    let names: BTreeSet<&str> = schemas.iter().map(Schema::name).collect();
    for r in references {
        if !names.contains(r.schema.as_str()) {
            skipped.push((
                r.schema.clone(),
                "reference names a schema not in the corpus".to_string(),
            ));
        }
    }

    let means = (!rows.is_empty()).then(|| {
        let mut m = [0.0; 5];
        for (i, slot) in m.iter_mut().enumerate() {
            *slot = rows.iter().map(|r| r.accuracy[i]).sum::<f64>() / rows.len() as f64;
        }
        m
    });
    Ok(ComparisonTable {
        k,
        rows,
        means,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaRank {
    pub name: String,
    pub focus_k: f64,
    pub balance: Option<f64>,
    pub cue_cr: Option<f64>,
}

/// Schemas by descending Focus(K), ties by ascending name.
pub fn rank_schemas(schemas: &[Schema]) -> Vec<SchemaRank> {
    let mut out: Vec<SchemaRank> = schemas
        .iter()
        .map(|s| {
            let index = CueIndex::new(s);
            SchemaRank {
                name: s.name().to_string(),
                focus_k: index.focus_k(),
                balance: metrics::balance(s).ok(),
                cue_cr: index.cue_cr().ok(),
            }
        })
        .collect();
    out.sort_by(|a, b| b.focus_k.total_cmp(&a.focus_k).then_with(|| a.name.cmp(&b.name)));
    out
}

pub fn schema_ranks_csv(ranks: &[SchemaRank]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "schema", "focus_k", "balance", "cue_cr"])
        .expect("in-memory write");
    let opt = |v: Option<f64>| v.map(fmt6).unwrap_or_else(|| "NA".into());
    for (i, r) in ranks.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.name.clone(),
            fmt6(r.focus_k),
            opt(r.balance),
            opt(r.cue_cr),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Lowercased labels of the `k` entity types with highest Focus(e),
/// duplicates collapsed (first occurrence kept).
pub fn derive_schema_tags(schema: &Schema, k: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    focus_rank(schema)
        .entries()
        .iter()
        .take(k)
        .map(|e| e.label.to_lowercase())
        .filter(|l| seen.insert(l.clone()))
        .collect()
}
