use serde::{Deserialize, Serialize};

use super::{incidence_csv, Schema, SchemaBuilder, Validated};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct JsonSchema {
    name: String,
    entity_types: Vec<JsonEntity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    subclass_of: Vec<(String, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonEntity {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    properties: Vec<String>,
}

fn strip_bom(bytes: &[u8]) -> &[u8] {
    bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes)
}

/// Parses either the canonical JSON form or a CSV incidence matrix,
/// chosen by the first non-whitespace byte (`{` means JSON).
/// `fallback_name` names CSV input, which carries no schema name.
pub fn parse_canonical(bytes: &[u8], fallback_name: &str) -> Result<Validated> {
    let bytes = strip_bom(bytes);
    match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'{') => parse_json(bytes),
        Some(_) => incidence_csv::parse_incidence_csv(bytes, fallback_name),
        None => Err(Error::parse(None, "empty input")),
    }
}

pub fn parse_json(bytes: &[u8]) -> Result<Validated> {
    let raw: JsonSchema = serde_json::from_slice(strip_bom(bytes))?;
    let mut builder = SchemaBuilder::new(raw.name);
    for e in raw.entity_types {
        builder.push_entity(e.id, e.label, e.properties);
    }
    for (child, parent) in raw.subclass_of {
        builder.push_subclass(child, parent);
    }
    builder.build()
}

/// Pretty-printed canonical JSON; entity types, properties and edges in
/// sorted order so equal schemas serialize to equal bytes.
pub fn to_canonical_json(schema: &Schema) -> String {
    let raw = JsonSchema {
        name: schema.name().to_string(),
        entity_types: schema
            .entity_types()
            .iter()
            .map(|e| JsonEntity {
                id: e.id.clone(),
                label: Some(e.label.clone()),
                properties: e.properties.iter().cloned().collect(),
            })
            .collect(),
        subclass_of: schema.subclass_edges().to_vec(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("schema serializes");
    out.push('\n');
    out
}
