//! Comparison rankers: TF-IDF, BM25, Class Match Measure and Density
//! Measure, all over the binary entity-type/property incidence.

use std::collections::{BTreeMap, BTreeSet};

use crate::metrics::CueIndex;
use crate::ranking::RankedList;
use crate::schema::Schema;

/// Lowercased, trimmed, deduplicated query terms (empty terms removed).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryTerms(Vec<String>);

impl QueryTerms {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in terms {
            let t = t.as_ref().trim().to_lowercase();
            if !t.is_empty() && seen.insert(t.clone()) {
                out.push(t);
            }
        }
        QueryTerms(out)
    }

    /// Splits on commas and whitespace.
    pub fn parse(text: &str) -> Self {
        Self::new(text.split(|c: char| c == ',' || c.is_whitespace()))
    }

    pub fn terms(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmmWeights {
    pub exact: f64,
    pub partial: f64,
}

impl Default for CmmWeights {
    fn default() -> Self {
        CmmWeights {
            exact: 0.6,
            partial: 0.4,
        }
    }
}

/// Weights for property count, direct subclasses, direct superclasses and
/// siblings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemWeights {
    pub properties: f64,
    pub subclasses: f64,
    pub superclasses: f64,
    pub siblings: f64,
}

impl Default for DemWeights {
    fn default() -> Self {
        DemWeights {
            properties: 1.0,
            subclasses: 0.25,
            superclasses: 0.25,
            siblings: 0.25,
        }
    }
}

fn scored<F>(schema: &Schema, metric: &str, mut score: F) -> RankedList
where
    F: FnMut(usize) -> f64,
{
    let entries = schema
        .entity_types()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.clone(), e.label.clone(), score(i)))
        .collect();
    RankedList::new(schema.name(), metric, entries)
}

/// `score(e) = Σ_{p ∈ props(e)} ln(|E| / df(p))`.
pub fn tfidf_rank(schema: &Schema) -> RankedList {
    let index = CueIndex::new(schema);
    let df = index.document_frequencies();
    let n = schema.entity_types().len() as f64;
    scored(schema, "tfidf", |i| {
        schema.entity_types()[i]
            .properties
            .iter()
            .map(|p| {
                let d = df[schema.property_index(p).expect("validated")] as f64;
                (n / d).ln()
            })
            .sum()
    })
}

/// Okapi BM25 with tf = 1, `+1`-smoothed idf and documents = entity types.
pub fn bm25_rank(schema: &Schema, params: Bm25Params) -> RankedList {
    let index = CueIndex::new(schema);
    let df = index.document_frequencies();
    let types = schema.entity_types();
    let n = types.len() as f64;
    let avgdl = types.iter().map(|e| e.properties.len()).sum::<usize>() as f64 / n;
    let Bm25Params { k1, b } = params;
    scored(schema, "bm25", |i| {
        let e = &types[i];
        if e.properties.is_empty() {
            return 0.0;
        }
        let length_norm = 1.0 - b + b * e.properties.len() as f64 / avgdl;
        let tf_part = (k1 + 1.0) / (1.0 + k1 * length_norm);
        e.properties
            .iter()
            .map(|p| {
                let d = df[schema.property_index(p).expect("validated")] as f64;
                let idf = ((n - d + 0.5) / (d + 0.5) + 1.0).ln();
                idf * tf_part
            })
            .sum()
    })
}

/// Splits a label on whitespace, `_`, `-` and camelCase boundaries and
/// lowercases the pieces. `HTTPServer` gives `http`, `server`.
pub fn tokenize_label(label: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in label.split(|c: char| c.is_whitespace() || c == '_' || c == '-') {
        let chars: Vec<char> = word.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let boundary = i > 0 && c.is_uppercase() && {
                let prev = chars[i - 1];
                let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
                prev.is_lowercase() || prev.is_numeric() || (prev.is_uppercase() && next_lower)
            };
            if boundary && !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            current.extend(c.to_lowercase());
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// Class Match Measure: `exact·E(e) + partial·P(e)`, where `E` counts query
/// terms equal to a label token and `P` counts query terms that are a strict
/// substring of a label token.
pub fn cmm_rank(schema: &Schema, query: &QueryTerms, weights: CmmWeights) -> RankedList {
    scored(schema, "cmm", |i| {
        let tokens = tokenize_label(&schema.entity_types()[i].label);
        let exact = query
            .terms()
            .iter()
            .filter(|t| tokens.iter().any(|tok| tok == *t))
            .count();
        let partial = query
            .terms()
            .iter()
            .filter(|t| tokens.iter().any(|tok| tok.len() > t.len() && tok.contains(t.as_str())))
            .count();
        weights.exact * exact as f64 + weights.partial * partial as f64
    })
}

/// Density Measure from property count and direct hierarchy neighbourhood.
pub fn dem_rank(schema: &Schema, weights: DemWeights) -> RankedList {
    let mut parents: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut children: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (c, p) in schema.subclass_edges() {
        parents.entry(c).or_default().insert(p);
        children.entry(p).or_default().insert(c);
    }
    scored(schema, "dem", |i| {
        let e = &schema.entity_types()[i];
        let id = e.id.as_str();
        let sub = children.get(id).map_or(0, BTreeSet::len);
        let sup = parents.get(id).map_or(0, BTreeSet::len);
        let siblings: BTreeSet<&str> = parents
            .get(id)
            .into_iter()
            .flatten()
            .flat_map(|p| children[p].iter().copied())
            .filter(|s| *s != id)
            .collect();
        weights.properties * e.properties.len() as f64
            + weights.subclasses * sub as f64
            + weights.superclasses * sup as f64
            + weights.siblings * siblings.len() as f64
    })
}
