//! Schema-driven XML generation for complex objects, and the way back.
//!
//! The object is first flattened into a [`Record`] of values keyed by
//! element name. Emission then walks the DTD recursively: every element the
//! content model asks for is fetched from the record in order. A required
//! leaf with no value is written as an empty element; an optional one is
//! left out.

use std::collections::HashMap;

use indexmap::IndexMap;
use thiserror::Error;

use crate::dtd::{ContentModel, DtdSchema, Multiplicity};
use crate::model::{
    Attribute, Cell, ComplexObject, ContinuousMeta, DocType, ImageMeta, Media, Payload,
    RelationalView, Subdocument, TextBody, TextPayload, Tuple,
};
use crate::xml::{write_document, Element};
use crate::MLFD_SYSTEM_ID;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SerializeError {
    #[error("cannot satisfy required element `{0}`")]
    ModelViolation(String),
    #[error("value for `{value}` has no place in the content model of `{element}`")]
    Unplaced { element: String, value: String },
}

/// Element values grouped by name, in the order instances were added.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Record {
    fields: IndexMap<String, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Text(String),
    Record(Record),
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(mut self, name: &str, value: impl Into<String>) -> Self {
        self.push(name, Value::Text(value.into()));
        self
    }

    pub fn opt_text(self, name: &str, value: Option<&str>) -> Self {
        match value {
            Some(v) => self.text(name, v),
            None => self,
        }
    }

    pub fn record(mut self, name: &str, value: Record) -> Self {
        self.push(name, Value::Record(value));
        self
    }

    pub fn push(&mut self, name: &str, value: Value) {
        self.fields.entry(name.to_string()).or_default().push(value);
    }
}

impl From<&ComplexObject> for Record {
    fn from(o: &ComplexObject) -> Record {
        let mut r = Record::new()
            .text("OBJ_NAME", &o.obj_name)
            .text("DATE", o.date.format("%Y-%m-%d").to_string())
            .text("SOURCE", &o.source);
        for sub in &o.subdocuments {
            r.push("SUBDOCUMENT", Value::Record(sub.into()));
        }
        r
    }
}

impl From<&Subdocument> for Record {
    fn from(s: &Subdocument) -> Record {
        let mut r = Record::new()
            .text("DOC_NAME", &s.doc_name)
            .text("TYPE", s.doc_type().as_str())
            .text("SIZE", s.size.to_string())
            .text("LOCATION", &s.location)
            .opt_text("LANGUAGE", s.language.as_deref());
        for k in &s.keywords {
            r.push("KEYWORD", Value::Text(k.clone()));
        }
        match &s.payload {
            Payload::Text(t) => r.record("TEXT", text_record(t)),
            Payload::RelationalView(v) => r.record("RELATIONAL_VIEW", view_record(v)),
            Payload::Image(i) => r.record("IMAGE", image_record(i)),
            Payload::Continuous(c) => r.record("CONTINUOUS", continuous_record(c)),
        }
    }
}

fn text_record(t: &TextPayload) -> Record {
    let r = Record::new()
        .text("NB_CHAR", t.nb_char.to_string())
        .text("NB_LINES", t.nb_lines.to_string());
    match &t.body {
        TextBody::Plain(content) => r.text("PLAIN_TEXT", content),
        TextBody::Tagged { content, links } => {
            let mut tagged = Record::new().text("CONTENT", content);
            for l in links {
                tagged.push("LINK", Value::Text(l.clone()));
            }
            r.record("TAGGED_TEXT", tagged)
        }
    }
}

fn view_record(v: &RelationalView) -> Record {
    let mut r = Record::new().opt_text("QUERY", v.query.as_deref());
    for a in &v.attributes {
        r.push(
            "ATTRIBUTE",
            Value::Record(
                Record::new()
                    .text("ATT_NAME", &a.att_name)
                    .text("DOMAIN", &a.domain),
            ),
        );
    }
    for t in &v.tuples {
        let mut tuple = Record::new();
        for c in &t.cells {
            tuple.push("ATT_NAME_REF", Value::Text(c.att_name_ref.clone()));
            tuple.push("VALUE", Value::Text(c.value.clone()));
        }
        r.push("TUPLE", Value::Record(tuple));
    }
    r
}

fn image_record(i: &ImageMeta) -> Record {
    Record::new()
        .opt_text("COMPRESSION", i.compression.as_deref())
        .text("FORMAT", &i.format)
        .opt_text("RESOLUTION", i.resolution.as_deref())
        .text("LENGTH", i.length.to_string())
        .text("WIDTH", i.width.to_string())
}

fn continuous_record(c: &ContinuousMeta) -> Record {
    let r = Record::new()
        .text("DURATION", &c.duration)
        .text("SPEED", &c.speed);
    match &c.media {
        Media::Sound(s) => r.text("SOUND", s),
        Media::Video(v) => r.text("VIDEO", v),
    }
}

/// Serializes a complex object against the bundled schema (or any schema
/// whose element names the record can fill).
pub fn serialize(object: &ComplexObject, schema: &DtdSchema) -> Result<String, SerializeError> {
    let tree = build_tree(schema.root(), &Record::from(object), schema)?;
    Ok(write_document(&tree, MLFD_SYSTEM_ID))
}

/// Builds the element tree for `record` as an instance of `element`.
pub fn build_tree(
    element: &str,
    record: &Record,
    schema: &DtdSchema,
) -> Result<Element, SerializeError> {
    build(element, &Value::Record(record.clone()), schema)
}

fn build(name: &str, value: &Value, schema: &DtdSchema) -> Result<Element, SerializeError> {
    let model = schema
        .model(name)
        .ok_or_else(|| SerializeError::ModelViolation(name.to_string()))?;
    match (model, value) {
        (ContentModel::PcData, Value::Text(t)) => Ok(Element::leaf(name, t.clone())),
        (ContentModel::PcData, Value::Record(_)) | (_, Value::Text(_)) => {
            Err(SerializeError::ModelViolation(name.to_string()))
        }
        (model, Value::Record(record)) => {
            let mut fetch = Fetch {
                record,
                cursors: HashMap::new(),
            };
            let mut el = Element::new(name);
            fetch.walk(model, schema, &mut el)?;
            for (field, values) in &record.fields {
                if fetch.cursor(field) < values.len() {
                    return Err(SerializeError::Unplaced {
                        element: name.to_string(),
                        value: field.clone(),
                    });
                }
            }
            Ok(el)
        }
    }
}

struct Fetch<'r> {
    record: &'r Record,
    cursors: HashMap<&'r str, usize>,
}

impl<'r> Fetch<'r> {
    fn cursor(&self, name: &str) -> usize {
        self.cursors.get(name).copied().unwrap_or(0)
    }

    fn remaining(&self, name: &str) -> bool {
        self.record
            .fields
            .get(name)
            .is_some_and(|v| v.len() > self.cursor(name))
    }

    fn available(&self, model: &ContentModel) -> bool {
        model.first_names().into_iter().any(|n| self.remaining(n))
    }

    fn take(&mut self, name: &str) -> Option<&'r Value> {
        let (key, values) = self.record.fields.get_key_value(name)?;
        let at = self.cursors.entry(key.as_str()).or_insert(0);
        let v = values.get(*at)?;
        *at += 1;
        Some(v)
    }

    fn consumed(&self) -> usize {
        self.cursors.values().sum()
    }

    fn walk(
        &mut self,
        model: &ContentModel,
        schema: &DtdSchema,
        out: &mut Element,
    ) -> Result<(), SerializeError> {
        match model {
            ContentModel::PcData => Ok(()),
            ContentModel::Element(name) => {
                match self.take(name) {
                    Some(v) => out.push(build(name, v, schema)?),
                    // missing value: an empty element stands in for it
                    None if schema.is_leaf(name) => out.push(Element::leaf(name.as_str(), "")),
                    None => return Err(SerializeError::ModelViolation(name.clone())),
                }
                Ok(())
            }
            ContentModel::Sequence(items) => items
                .iter()
                .try_for_each(|item| self.walk(item, schema, out)),
            ContentModel::Choice(alts) => {
                let alt = alts.iter().find(|a| self.available(a)).ok_or_else(|| {
                    let names: Vec<_> = model.first_names().into_iter().collect();
                    SerializeError::ModelViolation(names.join(" | "))
                })?;
                self.walk(alt, schema, out)
            }
            ContentModel::Repeat(inner, m) => {
                if *m == Multiplicity::Plus {
                    self.walk(inner, schema, out)?;
                }
                while self.available(inner) {
                    let before = self.consumed();
                    self.walk(inner, schema, out)?;
                    if !m.repeats() || self.consumed() == before {
                        break;
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: {reason}")]
pub struct ReconstructError {
    pub path: String,
    pub reason: String,
}

/// Children of an element grouped by name.
struct Fields<'a> {
    path: String,
    by_name: IndexMap<&'a str, Vec<&'a Element>>,
}

impl<'a> Fields<'a> {
    fn of(el: &'a Element, path: String) -> Self {
        let mut by_name: IndexMap<&str, Vec<&Element>> = IndexMap::new();
        for c in el.elements() {
            by_name.entry(c.name.as_str()).or_default().push(c);
        }
        Fields { path, by_name }
    }

    fn err(&self, reason: impl Into<String>) -> ReconstructError {
        ReconstructError {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    fn all(&self, name: &str) -> &[&'a Element] {
        self.by_name.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    fn one(&self, name: &str) -> Result<&'a Element, ReconstructError> {
        match self.all(name) {
            [e] => Ok(e),
            [] => Err(self.err(format!("missing `{name}`"))),
            _ => Err(self.err(format!("`{name}` given more than once"))),
        }
    }

    fn opt(&self, name: &str) -> Result<Option<&'a Element>, ReconstructError> {
        match self.all(name) {
            [] => Ok(None),
            [e] => Ok(Some(e)),
            _ => Err(self.err(format!("`{name}` given more than once"))),
        }
    }

    fn text(&self, name: &str) -> Result<String, ReconstructError> {
        Ok(self.one(name)?.text())
    }

    fn number<T: std::str::FromStr>(&self, name: &str) -> Result<T, ReconstructError> {
        let t = self.text(name)?;
        t.trim()
            .parse()
            .map_err(|_| self.err(format!("`{name}` is not a number: `{t}`")))
    }

    fn child(&self, el: &'a Element, i: usize) -> Fields<'a> {
        Fields::of(el, format!("{}/{}[{}]", self.path, el.name, i + 1))
    }
}

/// Rebuilds the complex object a valid document describes.
pub fn object_from_tree(root: &Element) -> Result<ComplexObject, ReconstructError> {
    let f = Fields::of(root, format!("/{}", root.name));
    let date_text = f.text("DATE")?;
    let date = crate::model::parse_date(&date_text).map_err(|e| f.err(e.to_string()))?;
    let subdocuments = f
        .all("SUBDOCUMENT")
        .iter()
        .enumerate()
        .map(|(i, s)| subdocument(&f.child(s, i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComplexObject {
        obj_name: f.text("OBJ_NAME")?,
        date,
        source: f.text("SOURCE")?,
        subdocuments,
    })
}

fn subdocument(f: &Fields) -> Result<Subdocument, ReconstructError> {
    let type_text = f.text("TYPE")?;
    let doc_type =
        DocType::parse(&type_text).ok_or_else(|| f.err(format!("unknown TYPE `{type_text}`")))?;
    let payloads: Vec<&str> = ["TEXT", "RELATIONAL_VIEW", "IMAGE", "CONTINUOUS"]
        .into_iter()
        .filter(|n| !f.all(n).is_empty())
        .collect();
    let [kind] = payloads[..] else {
        return Err(f.err("exactly one payload element is required"));
    };
    let pf = f.child(f.one(kind)?, 0);
    let payload = match kind {
        "TEXT" => Payload::Text(text_payload(&pf)?),
        "RELATIONAL_VIEW" => Payload::RelationalView(view(&pf)?),
        "IMAGE" => Payload::Image(ImageMeta {
            format: pf.text("FORMAT")?,
            compression: pf
                .opt("COMPRESSION")?
                .map(Element::text)
                .filter(|s| !s.is_empty()),
            resolution: pf
                .opt("RESOLUTION")?
                .map(Element::text)
                .filter(|s| !s.is_empty()),
            length: pf.number("LENGTH")?,
            width: pf.number("WIDTH")?,
        }),
        _ => {
            let media = match (pf.opt("SOUND")?, pf.opt("VIDEO")?) {
                (Some(s), None) => Media::Sound(s.text()),
                (None, Some(v)) => Media::Video(v.text()),
                _ => return Err(pf.err("exactly one of SOUND or VIDEO is required")),
            };
            Payload::Continuous(ContinuousMeta {
                duration: pf.text("DURATION")?,
                speed: pf.text("SPEED")?,
                media,
            })
        }
    };
    if payload.doc_type() != doc_type {
        return Err(f.err(format!(
            "TYPE `{type_text}` does not match the {kind} payload"
        )));
    }
    Ok(Subdocument {
        doc_name: f.text("DOC_NAME")?,
        size: f.number("SIZE")?,
        location: f.text("LOCATION")?,
        language: f.opt("LANGUAGE")?.map(Element::text),
        keywords: f.all("KEYWORD").iter().map(|k| k.text()).collect(),
        payload,
    })
}

fn text_payload(f: &Fields) -> Result<TextPayload, ReconstructError> {
    let body = match (f.opt("PLAIN_TEXT")?, f.opt("TAGGED_TEXT")?) {
        (Some(p), None) => TextBody::Plain(p.text()),
        (None, Some(t)) => {
            let tf = f.child(t, 0);
            TextBody::Tagged {
                content: tf.text("CONTENT")?,
                links: tf.all("LINK").iter().map(|l| l.text()).collect(),
            }
        }
        _ => return Err(f.err("exactly one of PLAIN_TEXT or TAGGED_TEXT is required")),
    };
    Ok(TextPayload {
        nb_char: f.number("NB_CHAR")?,
        nb_lines: f.number("NB_LINES")?,
        body,
    })
}

fn view(f: &Fields) -> Result<RelationalView, ReconstructError> {
    let attributes = f
        .all("ATTRIBUTE")
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let af = f.child(a, i);
            Ok(Attribute {
                att_name: af.text("ATT_NAME")?,
                domain: af.text("DOMAIN")?,
            })
        })
        .collect::<Result<Vec<_>, ReconstructError>>()?;
    let tuples = f
        .all("TUPLE")
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let tf = f.child(t, i);
            let refs = tf.all("ATT_NAME_REF");
            let values = tf.all("VALUE");
            if refs.len() != values.len() {
                return Err(tf.err("ATT_NAME_REF and VALUE counts differ"));
            }
            let cells = refs
                .iter()
                .zip(values)
                .map(|(r, v)| Cell {
                    att_name_ref: r.text(),
                    value: v.text(),
                })
                .collect();
            Ok(Tuple { cells })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RelationalView {
        query: f.opt("QUERY")?.map(Element::text),
        attributes,
        tuples,
    })
}
