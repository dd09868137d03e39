//! Formal contexts (entity types × properties) and their Burmeister `.cxt`
//! and CSV encodings.

use crate::error::{Error, Result};
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    /// Row-major, `objects.len() * attributes.len()` cells.
    incidence: Vec<bool>,
}

impl FormalContext {
    pub fn new(objects: Vec<String>, attributes: Vec<String>, incidence: Vec<bool>) -> Result<Self> {
        if incidence.len() != objects.len() * attributes.len() {
            return Err(Error::Validation(format!(
                "incidence has {} cells, expected {}×{}",
                incidence.len(),
                objects.len(),
                attributes.len()
            )));
        }
        Ok(FormalContext {
            objects,
            attributes,
            incidence,
        })
    }

    /// Objects are the entity types and attributes the properties, both in
    /// sorted id order.
    pub fn from_schema(schema: &Schema) -> Self {
        let attributes: Vec<String> = schema.properties().iter().map(|p| p.id.clone()).collect();
        let mut incidence = Vec::with_capacity(schema.entity_types().len() * attributes.len());
        for e in schema.entity_types() {
            incidence.extend(attributes.iter().map(|a| e.has_property(a)));
        }
        FormalContext {
            objects: schema.entity_types().iter().map(|e| e.id.clone()).collect(),
            attributes,
            incidence,
        }
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn row(&self, object: usize) -> &[bool] {
        let w = self.attributes.len();
        &self.incidence[object * w..(object + 1) * w]
    }

    pub fn get(&self, object: usize, attribute: usize) -> bool {
        self.incidence[object * self.attributes.len() + attribute]
    }

    /// Burmeister format with LF line endings. Fails if a name contains a
    /// line break, which the format cannot represent.
    pub fn to_cxt(&self) -> Result<String> {
        if let Some(bad) = self
            .objects
            .iter()
            .chain(&self.attributes)
            .find(|n| n.contains(['\n', '\r']))
        {
            return Err(Error::Validation(format!("name {bad:?} contains a line break")));
        }
        let mut out = format!("B\n\n{}\n{}\n\n", self.objects.len(), self.attributes.len());
        for name in self.objects.iter().chain(&self.attributes) {
            out.push_str(name);
            out.push('\n');
        }
        for i in 0..self.objects.len() {
            out.extend(self.row(i).iter().map(|&x| if x { 'X' } else { '.' }));
            out.push('\n');
        }
        Ok(out)
    }

    /// Reads the Burmeister format. CRLF line endings and trailing blank
    /// lines are tolerated.
    pub fn parse_cxt(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(None, format!("not UTF-8: {e}")))?;
        let mut lines = text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .enumerate()
            .map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(None, format!("unexpected end of input, expected {what}")))
        };

        let (n, l) = next("header `B`")?;
        if l != "B" {
            return Err(Error::parse(Some(n), "expected header `B`"));
        }
        let (n, l) = next("blank line")?;
        if !l.is_empty() {
            return Err(Error::parse(Some(n), "expected blank line after header"));
        }
        let mut count = |what: &str| -> Result<usize> {
            let (n, l) = next(what)?;
            l.trim()
                .parse()
                .map_err(|_| Error::parse(Some(n), format!("invalid {what} `{l}`")))
        };
        let n_objects = count("object count")?;
        let n_attributes = count("attribute count")?;
        let (n, l) = next("blank line")?;
        if !l.is_empty() {
            return Err(Error::parse(Some(n), "expected blank line after dimensions"));
        }
        let objects = (0..n_objects)
            .map(|_| next("object name").map(|(_, l)| l.to_string()))
            .collect::<Result<Vec<_>>>()?;
        let attributes = (0..n_attributes)
            .map(|_| next("attribute name").map(|(_, l)| l.to_string()))
            .collect::<Result<Vec<_>>>()?;
        let mut incidence = Vec::with_capacity(n_objects * n_attributes);
        for _ in 0..n_objects {
            let (n, l) = next("incidence row")?;
            if l.chars().count() != n_attributes {
                return Err(Error::parse(
                    Some(n),
                    format!("row has {} cells, expected {n_attributes}", l.chars().count()),
                ));
            }
            for c in l.chars() {
                match c {
                    'X' | 'x' => incidence.push(true),
                    '.' => incidence.push(false),
                    other => return Err(Error::parse(Some(n), format!("invalid cell `{other}`"))),
                }
            }
        }
        for (n, l) in lines {
            if !l.trim().is_empty() {
                return Err(Error::parse(Some(n), "unexpected content after incidence rows"));
            }
        }
        FormalContext::new(objects, attributes, incidence)
    }

    /// Same layout as the canonical incidence CSV.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![""];
        header.extend(self.attributes.iter().map(String::as_str));
        w.write_record(&header).expect("in-memory write");
        for (i, o) in self.objects.iter().enumerate() {
            let mut rec = vec![o.as_str()];
            rec.extend(self.row(i).iter().map(|&x| if x { "1" } else { "0" }));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}
