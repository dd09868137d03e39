//! Line-oriented N-Triples reader and RDFS/OWL vocabulary extraction.
//!
//! Only the plain N-Triples subset is accepted: IRIs in angle brackets,
//! blank nodes, and quoted literals with an optional language tag or
//! datatype, one triple per line terminated by `.`.

use std::collections::{BTreeMap, BTreeSet};

use super::{SchemaBuilder, Validated};
use crate::error::{Error, Result};

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const RDF_PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
const OWL_PROPERTY_TYPES: [&str; 4] = [
    "http://www.w3.org/2002/07/owl#ObjectProperty",
    "http://www.w3.org/2002/07/owl#DatatypeProperty",
    "http://www.w3.org/2002/07/owl#AnnotationProperty",
    "http://www.w3.org/2002/07/owl#FunctionalProperty",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Term {
    Iri(String),
    Blank(String),
    Literal {
        value: String,
        lang: Option<String>,
        datatype: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

/// Extracts a schema from an N-Triples vocabulary.
///
/// Entity types are the IRIs typed `rdfs:Class` or `owl:Class`; their ids are
/// the full IRIs. A property is attached to every extracted class named by
/// one of its `rdfs:domain` statements. Labels come from `rdfs:label`
/// (English preferred, then untagged, then the smallest value) or fall back
/// to the IRI local name.
pub fn parse_ntriples_vocab(bytes: &[u8], name: &str) -> Result<Validated> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(None, format!("input is not UTF-8: {e}")))?;
    let triples = parse_document(text)?;

    let mut classes: BTreeSet<&str> = BTreeSet::new();
    let mut declared_properties: BTreeSet<&str> = BTreeSet::new();
    let mut domains: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut subclass: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut labels: BTreeMap<&str, Vec<(Option<&str>, &str)>> = BTreeMap::new();

    for t in &triples {
        let Term::Iri(subject) = &t.subject else {
            continue;
        };
        match (t.predicate.as_str(), &t.object) {
            (RDF_TYPE, Term::Iri(o)) if o == RDFS_CLASS || o == OWL_CLASS => {
                classes.insert(subject);
            }
            (RDF_TYPE, Term::Iri(o)) if o == RDF_PROPERTY || OWL_PROPERTY_TYPES.contains(&o.as_str()) => {
                declared_properties.insert(subject);
            }
            (RDFS_DOMAIN, Term::Iri(o)) => {
                domains.entry(subject).or_default().insert(o);
            }
            (RDFS_SUBCLASS_OF, Term::Iri(o)) => {
                subclass.insert((subject, o));
            }
            (RDFS_LABEL, Term::Literal { value, lang, .. }) => {
                labels.entry(subject).or_default().push((lang.as_deref(), value));
            }
            _ => {}
        }
    }

    if classes.is_empty() {
        return Err(Error::Validation("empty schema: no classes extracted".into()));
    }

    let mut warnings = Vec::new();
    let mut class_props: BTreeMap<&str, Vec<&str>> = classes.iter().map(|c| (*c, Vec::new())).collect();
    let mut property_ids: BTreeSet<&str> = declared_properties.clone();
    property_ids.extend(domains.keys().copied());
    for property in &property_ids {
        let Some(ds) = domains.get(property) else {
            warnings.push(format!("property `{property}` has no rdfs:domain; dropped"));
            continue;
        };
        let mut attached = false;
        for d in ds {
            if let Some(props) = class_props.get_mut(d) {
                props.push(property);
                attached = true;
            }
        }
        if !attached {
            warnings.push(format!(
                "property `{property}` has no extracted class as domain; dropped"
            ));
        }
    }

    let mut builder = SchemaBuilder::new(name);
    for property in &property_ids {
        let label = pick_label(labels.get(property)).unwrap_or_else(|| local_name(property).to_string());
        builder.push_property_label(*property, label);
    }
    for (class, props) in class_props {
        let label = pick_label(labels.get(class)).unwrap_or_else(|| local_name(class).to_string());
        builder.push_entity(class, Some(label), props);
    }
    for (child, parent) in subclass {
        if child != parent && classes.contains(child) && classes.contains(parent) {
            builder.push_subclass(child, parent);
        }
    }
    let mut validated = builder.build()?;
    // property-level warnings first, then the builder's own
    warnings.append(&mut validated.warnings);
    validated.warnings = warnings;
    Ok(validated)
}

fn pick_label(candidates: Option<&Vec<(Option<&str>, &str)>>) -> Option<String> {
    let candidates = candidates?;
    let rank = |lang: Option<&str>| match lang {
        Some(l) if l.eq_ignore_ascii_case("en") || l.to_ascii_lowercase().starts_with("en-") => 0,
        None => 1,
        Some(_) => 2,
    };
    candidates
        .iter()
        .min_by(|a, b| rank(a.0).cmp(&rank(b.0)).then(a.1.cmp(b.1)))
        .map(|(_, v)| v.to_string())
}

/// Fragment after `#`, else the last non-empty `/` segment.
pub(crate) fn local_name(iri: &str) -> &str {
    if let Some((_, frag)) = iri.rsplit_once('#') {
        if !frag.is_empty() {
            return frag;
        }
    }
    iri.trim_end_matches('/')
        .rsplit('/')
        .next()
        .filter(|s| !s.is_empty())
        .unwrap_or(iri)
}

pub(crate) fn parse_document(text: &str) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if let Some(t) = parse_line(line).map_err(|m| Error::parse(Some(i + 1), m))? {
            out.push(t);
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn at_end_or_comment(&self) -> bool {
        matches!(self.peek(), None | Some('#'))
    }
}

type LineResult<T> = std::result::Result<T, String>;

fn parse_line(line: &str) -> LineResult<Option<Triple>> {
    let mut c = Cursor { s: line, pos: 0 };
    c.skip_ws();
    if c.at_end_or_comment() {
        return Ok(None);
    }
    let subject = match parse_term(&mut c)? {
        t @ (Term::Iri(_) | Term::Blank(_)) => t,
        Term::Literal { .. } => return Err("literal in subject position".into()),
    };
    c.skip_ws();
    let predicate = match parse_term(&mut c)? {
        Term::Iri(i) => i,
        _ => return Err("predicate must be an IRI".into()),
    };
    c.skip_ws();
    let object = parse_term(&mut c)?;
    c.skip_ws();
    if c.bump() != Some('.') {
        return Err("expected `.` at end of triple".into());
    }
    c.skip_ws();
    if !c.at_end_or_comment() {
        return Err("unexpected content after `.`".into());
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

fn parse_term(c: &mut Cursor) -> LineResult<Term> {
    match c.peek() {
        Some('<') => parse_iri(c).map(Term::Iri),
        Some('_') => {
            c.bump();
            if c.bump() != Some(':') {
                return Err("malformed blank node".into());
            }
            let start = c.pos;
            while matches!(c.peek(), Some(ch) if !ch.is_whitespace() && ch != '.' || ch == '.' && is_inner_dot(c)) {
                c.bump();
            }
            if c.pos == start {
                return Err("empty blank node label".into());
            }
            Ok(Term::Blank(c.s[start..c.pos].to_string()))
        }
        Some('"') => parse_literal(c),
        Some(ch) => Err(format!("unexpected character `{ch}`")),
        None => Err("unexpected end of line".into()),
    }
}

// blank node labels may contain '.' but not end with it
fn is_inner_dot(c: &Cursor) -> bool {
    let rest = &c.s[c.pos + 1..];
    matches!(rest.chars().next(), Some(ch) if !ch.is_whitespace() && ch != '#')
}

fn parse_iri(c: &mut Cursor) -> LineResult<String> {
    c.bump(); // '<'
    let mut out = String::new();
    loop {
        match c.bump() {
            Some('>') => break,
            Some('\\') => out.push(parse_unicode_escape(c)?),
            Some(ch) if ch.is_whitespace() || ch == '<' || ch == '"' => {
                return Err(format!("invalid character `{ch}` in IRI"))
            }
            Some(ch) => out.push(ch),
            None => return Err("unterminated IRI".into()),
        }
    }
    if out.is_empty() {
        return Err("empty IRI".into());
    }
    Ok(out)
}

fn parse_unicode_escape(c: &mut Cursor) -> LineResult<char> {
    let width = match c.bump() {
        Some('u') => 4,
        Some('U') => 8,
        other => return Err(format!("invalid escape `\\{}`", other.unwrap_or(' '))),
    };
    let end = c.pos + width;
    let hex = c.s.get(c.pos..end).ok_or("truncated unicode escape")?;
    let code = u32::from_str_radix(hex, 16).map_err(|_| format!("invalid unicode escape `{hex}`"))?;
    c.pos = end;
    char::from_u32(code).ok_or_else(|| format!("invalid code point {code:#x}"))
}

fn parse_literal(c: &mut Cursor) -> LineResult<Term> {
    c.bump(); // '"'
    let mut value = String::new();
    loop {
        match c.bump() {
            Some('"') => break,
            Some('\\') => {
                let ch = match c.peek() {
                    Some('t') => '\t',
                    Some('b') => '\u{8}',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('f') => '\u{c}',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    Some('u' | 'U') => {
                        value.push(parse_unicode_escape(c)?);
                        continue;
                    }
                    _ => return Err("invalid escape in literal".into()),
                };
                c.bump();
                value.push(ch);
            }
            Some(ch) => value.push(ch),
            None => return Err("unterminated literal".into()),
        }
    }
    let mut lang = None;
    let mut datatype = None;
    match c.peek() {
        Some('@') => {
            c.bump();
            let start = c.pos;
            while matches!(c.peek(), Some(ch) if ch.is_ascii_alphanumeric() || ch == '-') {
                c.bump();
            }
            if c.pos == start {
                return Err("empty language tag".into());
            }
            lang = Some(c.s[start..c.pos].to_string());
        }
        Some('^') => {
            c.bump();
            if c.bump() != Some('^') || c.peek() != Some('<') {
                return Err("malformed datatype".into());
            }
            datatype = Some(parse_iri(c)?);
        }
        _ => {}
    }
    Ok(Term::Literal { value, lang, datatype })
}
