//! Cue-validity focus metrics.
//!
//! A property `p` is a cue for every entity type that lists it. With binary
//! incidence and a uniform prior over the types possessing `p`, the cue
//! validity of `p` for `e` is `P(e | p) = 1 / df(p)`, where `df(p)` counts the
//! entity types whose property set contains `p`.
//!
//! * `Cue_er(e)`: sum of the cue validities of `e`'s properties.
//! * `NCue(e)`: `Cue_er(e) / |props(e)|`, or 0 for a type without properties.
//! * `Focus(e)`: equal to `Cue_er(e)`.
//! * `Cue_cr(K)`: `Σ Cue_er / Σ |props|` (micro-average over incidences).
//! * `Focus(K)`: mean `NCue` over all entity types (macro-average).
//! * `balance(K)`: `|E| / |P|`.
//!
//! Sums are grouped by document frequency (and `Focus(K)` by `NCue` value)
//! in ascending order. Results are reproducible bit for bit, and the
//! extremes are exact: a disjoint schema gives `Focus(K) = 1.0`, `n` types
//! sharing one property set give `1.0 / n as f64`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{EntityType, Schema};

/// Bumped whenever a metric definition changes; keys the corpus cache.
pub const METRIC_SUITE_VERSION: &str = "focus-v1";

/// Document frequency of every property, aligned with `Schema::properties()`.
#[derive(Debug, Clone)]
pub struct CueIndex<'a> {
    schema: &'a Schema,
    df: Vec<usize>,
}

impl<'a> CueIndex<'a> {
    pub fn new(schema: &'a Schema) -> Self {
        let mut df = vec![0usize; schema.properties().len()];
        for e in schema.entity_types() {
            for p in &e.properties {
                // validated schemas list every referenced property
                let i = schema.property_index(p).expect("validated property");
                df[i] += 1;
            }
        }
        CueIndex { schema, df }
    }

    pub fn schema(&self) -> &'a Schema {
        self.schema
    }

    pub fn df(&self, property: &str) -> Result<usize> {
        self.schema
            .property_index(property)
            .map(|i| self.df[i])
            .ok_or_else(|| lookup("property", property))
    }

    pub fn document_frequencies(&self) -> &[usize] {
        &self.df
    }

    fn entity(&self, id: &str) -> Result<&'a EntityType> {
        self.schema.entity(id).ok_or_else(|| lookup("entity type", id))
    }

    pub fn cue_validity(&self, property: &str, entity: &str) -> Result<f64> {
        let df = self.df(property)?;
        let e = self.entity(entity)?;
        Ok(if e.has_property(property) { 1.0 / df as f64 } else { 0.0 })
    }

    /// `df -> number of e's properties with that df`.
    fn df_histogram(&self, e: &EntityType) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for p in &e.properties {
            let i = self.schema.property_index(p).expect("validated property");
            *h.entry(self.df[i]).or_insert(0) += 1;
        }
        h
    }

    fn cue_er_of(&self, e: &EntityType) -> f64 {
        self.df_histogram(e)
            .into_iter()
            .fold(0.0, |acc, (df, count)| acc + count as f64 / df as f64)
    }

    fn ncue_of(&self, e: &EntityType) -> f64 {
        let k = e.properties.len();
        if k == 0 {
            return 0.0;
        }
        self.df_histogram(e)
            .into_iter()
            .map(|(df, count)| count as f64 / (df * k) as f64)
            .sum()
    }

    pub fn cue_er(&self, entity: &str) -> Result<f64> {
        Ok(self.cue_er_of(self.entity(entity)?))
    }

    pub fn normalized_cue(&self, entity: &str) -> Result<f64> {
        Ok(self.ncue_of(self.entity(entity)?))
    }

    pub fn focus_e(&self, entity: &str) -> Result<f64> {
        self.cue_er(entity)
    }

    pub fn cue_cr(&self) -> Result<f64> {
        let incidences: usize = self.schema.entity_types().iter().map(|e| e.properties.len()).sum();
        if incidences == 0 {
            return Err(Error::UndefinedMetric(format!(
                "Cue_cr of schema `{}`: no property incidences",
                self.schema.name()
            )));
        }
        let total: f64 = self.schema.entity_types().iter().map(|e| self.cue_er_of(e)).sum();
        Ok(total / incidences as f64)
    }

    pub fn focus_k(&self) -> f64 {
        let types = self.schema.entity_types();
        // NCue is never negative, so bit order is numeric order
        let mut by_value: BTreeMap<u64, usize> = BTreeMap::new();
        for e in types {
            *by_value.entry(self.ncue_of(e).to_bits()).or_insert(0) += 1;
        }
        by_value.into_iter().fold(0.0, |acc, (bits, count)| {
            acc + f64::from_bits(bits) * (count as f64 / types.len() as f64)
        })
    }
}

fn lookup(kind: &'static str, id: &str) -> Error {
    Error::Lookup {
        kind,
        id: id.to_string(),
    }
}

pub fn cue_validity(schema: &Schema, property: &str, entity: &str) -> Result<f64> {
    CueIndex::new(schema).cue_validity(property, entity)
}

pub fn cue_er(schema: &Schema, entity: &str) -> Result<f64> {
    CueIndex::new(schema).cue_er(entity)
}

pub fn normalized_cue(schema: &Schema, entity: &str) -> Result<f64> {
    CueIndex::new(schema).normalized_cue(entity)
}

pub fn focus_e(schema: &Schema, entity: &str) -> Result<f64> {
    CueIndex::new(schema).focus_e(entity)
}

pub fn cue_cr(schema: &Schema) -> Result<f64> {
    CueIndex::new(schema).cue_cr()
}

pub fn focus_k(schema: &Schema) -> f64 {
    CueIndex::new(schema).focus_k()
}

pub fn balance(schema: &Schema) -> Result<f64> {
    let p = schema.properties().len();
    if p == 0 {
        return Err(Error::UndefinedMetric(format!(
            "balance of schema `{}`: no properties",
            schema.name()
        )));
    }
    Ok(schema.entity_types().len() as f64 / p as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMetrics {
    pub id: String,
    pub label: String,
    pub properties: usize,
    pub cue_er: f64,
    pub ncue: f64,
    pub focus_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaMetrics {
    pub name: String,
    pub entity_types: usize,
    pub properties: usize,
    pub cue_cr: Option<f64>,
    pub balance: Option<f64>,
    pub focus_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub suite_version: String,
    pub schema: SchemaMetrics,
    /// Sorted by entity id.
    pub entities: Vec<EntityMetrics>,
    /// Messages for metrics that could not be computed (their fields are null).
    pub undefined: Vec<String>,
}

pub fn metric_report(schema: &Schema) -> MetricReport {
    let index = CueIndex::new(schema);
    let entities = schema
        .entity_types()
        .iter()
        .map(|e| {
            let cue_er = index.cue_er_of(e);
            EntityMetrics {
                id: e.id.clone(),
                label: e.label.clone(),
                properties: e.properties.len(),
                cue_er,
                ncue: index.ncue_of(e),
                focus_e: cue_er,
            }
        })
        .collect();
    let mut undefined = Vec::new();
    let mut flag = |r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            undefined.push(e.to_string());
            None
        }
    };
    let cue_cr = flag(index.cue_cr());
    let balance = flag(balance(schema));
    MetricReport {
        suite_version: METRIC_SUITE_VERSION.to_string(),
        schema: SchemaMetrics {
            name: schema.name().to_string(),
            entity_types: schema.entity_types().len(),
            properties: schema.properties().len(),
            cue_cr,
            balance,
            focus_k: index.focus_k(),
        },
        entities,
        undefined,
    }
}

pub(crate) fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt6).unwrap_or_else(|| "NA".to_string())
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per entity type, then a `schema` summary row. Undefined
    /// values are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "scope",
            "id",
            "label",
            "n_properties",
            "cue_er",
            "ncue",
            "focus_e",
            "n_entity_types",
            "cue_cr",
            "balance",
            "focus_k",
        ])
        .expect("in-memory write");
        for e in &self.entities {
            w.write_record([
                "entity",
                &e.id,
                &e.label,
                &e.properties.to_string(),
                &fmt6(e.cue_er),
                &fmt6(e.ncue),
                &fmt6(e.focus_e),
                "",
                "",
                "",
                "",
            ])
            .expect("in-memory write");
        }
        let s = &self.schema;
        w.write_record([
            "schema",
            &s.name,
            &s.name,
            &s.properties.to_string(),
            "",
            "",
            "",
            &s.entity_types.to_string(),
            &fmt_opt(s.cue_cr),
            &fmt_opt(s.balance),
            &fmt6(s.focus_k),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}
