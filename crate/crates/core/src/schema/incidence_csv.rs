//! CSV incidence matrix: first row holds the property ids (after a corner
//! cell), first column the entity-type ids, cells are `1` or `0`.

use super::{Schema, SchemaBuilder, Validated};
use crate::error::{Error, Result};

pub fn parse_incidence_csv(bytes: &[u8], name: &str) -> Result<Validated> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::parse(Some(1), "missing header row")),
    };
    let property_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if let Some(empty) = property_ids.iter().position(String::is_empty) {
        return Err(Error::parse(
            Some(1),
            format!("empty property id in column {}", empty + 2),
        ));
    }
    let mut sorted = property_ids.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Validation(format!("duplicate property id `{}`", w[0])));
    }

    let mut builder = SchemaBuilder::new(name);
    for id in &property_ids {
        builder.push_property_label(id.clone(), id.clone());
    }
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize);
        let mut cells = record.iter();
        let entity = cells.next().unwrap_or_default().to_string();
        let mut props = Vec::new();
        for (cell, property) in cells.zip(&property_ids) {
            match cell {
                "1" => props.push(property.clone()),
                "0" => {}
                other => {
                    return Err(Error::parse(
                        line,
                        format!("cell `{other}` for ({entity}, {property}) is not 0 or 1"),
                    ))
                }
            }
        }
        builder.push_entity(entity, None, props);
    }
    builder.build()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    Error::parse(line, e.to_string())
}

pub fn to_incidence_csv(schema: &Schema) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![""];
    header.extend(schema.properties().iter().map(|p| p.id.as_str()));
    w.write_record(&header).expect("in-memory write");
    for e in schema.entity_types() {
        let mut row = vec![e.id.as_str()];
        row.extend(
            schema
                .properties()
                .iter()
                .map(|p| if e.has_property(&p.id) { "1" } else { "0" }),
        );
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
