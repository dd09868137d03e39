//! Knowledge base schema model: entity types described by property sets,
//! optionally related by subclass edges.
//!
//! A [`Schema`] can only be obtained through [`SchemaBuilder::build`] (or one
//! of the parsers, which go through the builder), so every value in hand is
//! validated: ids are unique, edges resolve and form a DAG, and every listed
//! property is used by at least one entity type.

mod canonical;
mod incidence_csv;
mod ntriples;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};

pub use canonical::{parse_canonical, parse_json, to_canonical_json};
pub use incidence_csv::{parse_incidence_csv, to_incidence_csv};
pub use ntriples::parse_ntriples_vocab;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Property {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityType {
    pub id: String,
    pub label: String,
    pub properties: BTreeSet<String>,
}

impl EntityType {
    pub fn has_property(&self, property: &str) -> bool {
        self.properties.contains(property)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    name: String,
    entity_types: Vec<EntityType>,
    properties: Vec<Property>,
    subclass_of: Vec<(String, String)>,
}

/// A freshly validated schema together with the non-fatal issues found
/// while building it (dropped orphan properties, empty property sets, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub schema: Schema,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemaStats {
    pub entity_types: usize,
    pub properties: usize,
    pub incidences: usize,
    pub density: f64,
}

impl Schema {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Entity types, sorted by id.
    pub fn entity_types(&self) -> &[EntityType] {
        &self.entity_types
    }

    /// Properties, sorted by id.
    pub fn properties(&self) -> &[Property] {
        &self.properties
    }

    /// `(child, parent)` pairs, sorted.
    pub fn subclass_edges(&self) -> &[(String, String)] {
        &self.subclass_of
    }

    pub fn entity(&self, id: &str) -> Option<&EntityType> {
        self.entity_index(id).map(|i| &self.entity_types[i])
    }

    pub fn entity_index(&self, id: &str) -> Option<usize> {
        self.entity_types.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    pub fn property(&self, id: &str) -> Option<&Property> {
        self.property_index(id).map(|i| &self.properties[i])
    }

    pub fn property_index(&self, id: &str) -> Option<usize> {
        self.properties.binary_search_by(|p| p.id.as_str().cmp(id)).ok()
    }

    /// Renames the schema; names are not part of validation.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn stats(&self) -> SchemaStats {
        let incidences = self.entity_types.iter().map(|e| e.properties.len()).sum();
        let cells = self.entity_types.len() * self.properties.len();
        let density = if cells == 0 {
            0.0
        } else {
            incidences as f64 / cells as f64
        };
        SchemaStats {
            entity_types: self.entity_types.len(),
            properties: self.properties.len(),
            incidences,
            density,
        }
    }

    /// Unions every entity type's property set with those of all its
    /// ancestors. Idempotent; property sets only grow.
    pub fn inherit_properties(&self) -> Schema {
        if self.subclass_of.is_empty() {
            return self.clone();
        }
        let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
        for (child, parent) in &self.subclass_of {
            parents.entry(child).or_default().push(parent);
        }
        let mut out = self.clone();
        for entity in &mut out.entity_types {
            let mut stack: Vec<&str> = parents.get(entity.id.as_str()).cloned().unwrap_or_default();
            let mut seen: BTreeSet<&str> = BTreeSet::new();
            while let Some(ancestor) = stack.pop() {
                if !seen.insert(ancestor) {
                    continue;
                }
                if let Some(ps) = parents.get(ancestor) {
                    stack.extend(ps.iter().copied());
                }
            }
            for ancestor in seen {
                // edges are validated, so the ancestor always resolves
                if let Some(a) = self.entity(ancestor) {
                    entity.properties.extend(a.properties.iter().cloned());
                }
            }
        }
        out
    }

    /// Returns a builder pre-populated with this schema's content.
    pub fn to_builder(&self) -> SchemaBuilder {
        let mut b = SchemaBuilder::new(self.name.clone());
        for p in &self.properties {
            b = b.property_label(p.id.clone(), p.label.clone());
        }
        for e in &self.entity_types {
            b = b.entity(e.id.clone(), Some(e.label.clone()), e.properties.iter().cloned());
        }
        for (c, p) in &self.subclass_of {
            b = b.subclass(c.clone(), p.clone());
        }
        b
    }
}

/// Collects entity types, property labels and subclass edges, then
/// validates them into a [`Schema`].
#[derive(Debug, Clone, Default)]
pub struct SchemaBuilder {
    name: String,
    entities: Vec<(String, Option<String>, Vec<String>)>,
    property_labels: BTreeMap<String, String>,
    edges: Vec<(String, String)>,
}

impl SchemaBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        SchemaBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn entity<I, S>(mut self, id: impl Into<String>, label: Option<String>, properties: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.push_entity(id, label, properties);
        self
    }

    pub fn push_entity<I, S>(&mut self, id: impl Into<String>, label: Option<String>, properties: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.entities
            .push((id.into(), label, properties.into_iter().map(Into::into).collect()));
    }

    /// Declares a property (with a display label). A declared property that
    /// no entity type references is dropped at build time with a warning.
    pub fn property_label(mut self, id: impl Into<String>, label: impl Into<String>) -> Self {
        self.push_property_label(id, label);
        self
    }

    pub fn push_property_label(&mut self, id: impl Into<String>, label: impl Into<String>) {
        self.property_labels.insert(id.into(), label.into());
    }

    pub fn subclass(mut self, child: impl Into<String>, parent: impl Into<String>) -> Self {
        self.push_subclass(child, parent);
        self
    }

    pub fn push_subclass(&mut self, child: impl Into<String>, parent: impl Into<String>) {
        self.edges.push((child.into(), parent.into()));
    }

    pub fn build(self) -> Result<Validated> {
        let SchemaBuilder {
            name,
            entities,
            mut property_labels,
            edges,
        } = self;
        let mut warnings = Vec::new();

        if entities.is_empty() {
            return Err(Error::Validation("empty schema: no entity types".into()));
        }

        let mut entity_types: Vec<EntityType> = Vec::with_capacity(entities.len());
        for (id, label, props) in entities {
            if id.is_empty() {
                return Err(Error::Validation("entity type with empty id".into()));
            }
            let mut properties = BTreeSet::new();
            for p in props {
                if p.is_empty() {
                    return Err(Error::Validation(format!(
                        "entity type `{id}` references a property with empty id"
                    )));
                }
                properties.insert(p);
            }
            let label = label.filter(|l| !l.is_empty()).unwrap_or_else(|| id.clone());
            entity_types.push(EntityType { id, label, properties });
        }
        entity_types.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = entity_types.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Validation(format!("duplicate entity type id `{}`", w[0].id)));
        }
        for e in &entity_types {
            if e.properties.is_empty() {
                warnings.push(format!("entity type `{}` has no properties", e.id));
            }
        }

        let used: BTreeSet<&String> = entity_types.iter().flat_map(|e| e.properties.iter()).collect();
        property_labels.retain(|id, _| {
            let keep = used.contains(id);
            if !keep {
                warnings.push(format!("orphan property `{id}` dropped"));
            }
            keep
        });
        let properties: Vec<Property> = used
            .into_iter()
            .map(|id| Property {
                id: id.clone(),
                label: property_labels
                    .get(id)
                    .filter(|l| !l.is_empty())
                    .cloned()
                    .unwrap_or_else(|| id.clone()),
            })
            .collect();

        let mut subclass_of: Vec<(String, String)> = edges;
        subclass_of.sort();
        subclass_of.dedup();
        let index = |id: &str| entity_types.binary_search_by(|e| e.id.as_str().cmp(id)).ok();
        let mut adjacency = vec![Vec::new(); entity_types.len()];
        for (child, parent) in &subclass_of {
            let c = index(child)
                .ok_or_else(|| Error::Validation(format!("subclass edge references unknown entity type `{child}`")))?;
            let p = index(parent)
                .ok_or_else(|| Error::Validation(format!("subclass edge references unknown entity type `{parent}`")))?;
            adjacency[c].push(p);
        }
        if let Some(node) = find_cycle(&adjacency) {
            return Err(Error::Validation(format!(
                "cycle in subclass edges involving `{}`",
                entity_types[node].id
            )));
        }

        Ok(Validated {
            schema: Schema {
                name,
                entity_types,
                properties,
                subclass_of,
            },
            warnings,
        })
    }
}

/// Returns a node on a cycle if the directed graph has one.
fn find_cycle(adjacency: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks = vec![Mark::New; adjacency.len()];
    for start in 0..adjacency.len() {
        if marks[start] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next child position)
        let mut stack = vec![(start, 0usize)];
        marks[start] = Mark::Active;
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            if let Some(&next) = adjacency[node].get(*pos) {
                *pos += 1;
                match marks[next] {
                    Mark::Active => return Some(next),
                    Mark::New => {
                        marks[next] = Mark::Active;
                        stack.push((next, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                marks[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}
