//! The unified data model for multiform web data.
//!
//! A [`ComplexObject`] is a named, dated and sourced container of one or more
//! [`Subdocument`]s. Each subdocument carries the common metadata shared by
//! every data form plus exactly one typed payload. The `TYPE` string written
//! to XML is derived from the payload variant, so the two can never disagree.

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("a complex object needs at least one subdocument")]
    EmptySubdocuments,
    #[error("invalid date `{0}`: expected a calendar date as YYYY-MM-DD")]
    InvalidDate(String),
    #[error("object name must not be empty")]
    EmptyObjectName,
    #[error("subdocument #{0} has an empty name")]
    EmptyDocName(usize),
    #[error("subdocument `{doc}`: {reason}")]
    InvalidPayload { doc: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexObject {
    pub obj_name: String,
    pub date: NaiveDate,
    pub source: String,
    pub subdocuments: Vec<Subdocument>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdocument {
    pub doc_name: String,
    pub size: u64,
    pub location: String,
    pub language: Option<String>,
    pub keywords: Vec<String>,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Text(TextPayload),
    RelationalView(RelationalView),
    Image(ImageMeta),
    Continuous(ContinuousMeta),
}

/// Vocabulary of the `TYPE` element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DocType {
    Text,
    Image,
    RelationalView,
    Sound,
    Video,
}

impl DocType {
    pub const ALL: [DocType; 5] = [
        DocType::Text,
        DocType::Image,
        DocType::RelationalView,
        DocType::Sound,
        DocType::Video,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Text => "Text",
            DocType::Image => "Image",
            DocType::RelationalView => "Relational view",
            DocType::Sound => "Sound",
            DocType::Video => "Video",
        }
    }

    pub fn parse(s: &str) -> Option<DocType> {
        DocType::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl std::fmt::Display for DocType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextPayload {
    pub nb_char: u64,
    pub nb_lines: u64,
    pub body: TextBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextBody {
    Plain(String),
    Tagged { content: String, links: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalView {
    pub query: Option<String>,
    pub attributes: Vec<Attribute>,
    pub tuples: Vec<Tuple>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub att_name: String,
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple {
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub att_name_ref: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    /// `Gif`, `Png` or `Jpeg` when read from a header; empty when unknown.
    pub format: String,
    pub compression: Option<String>,
    pub resolution: Option<String>,
    /// Height in pixels.
    pub length: u32,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuousMeta {
    /// Seconds, kept as the decimal text it was captured with.
    pub duration: String,
    pub speed: String,
    pub media: Media,
}

/// The PCDATA of `SOUND`/`VIDEO` is the media file reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Media {
    Sound(String),
    Video(String),
}

impl Payload {
    pub fn doc_type(&self) -> DocType {
        match self {
            Payload::Text(_) => DocType::Text,
            Payload::RelationalView(_) => DocType::RelationalView,
            Payload::Image(_) => DocType::Image,
            Payload::Continuous(c) => match c.media {
                Media::Sound(_) => DocType::Sound,
                Media::Video(_) => DocType::Video,
            },
        }
    }
}

impl Subdocument {
    pub fn doc_type(&self) -> DocType {
        self.payload.doc_type()
    }

    fn check(&self, index: usize) -> Result<(), ModelError> {
        if self.doc_name.is_empty() {
            return Err(ModelError::EmptyDocName(index + 1));
        }
        let invalid = |reason: String| ModelError::InvalidPayload {
            doc: self.doc_name.clone(),
            reason,
        };
        match &self.payload {
            Payload::Text(t) => {
                if let TextBody::Tagged { links, .. } = &t.body {
                    if links.iter().any(String::is_empty) {
                        return Err(invalid("empty link".into()));
                    }
                }
            }
            Payload::RelationalView(view) => view.check().map_err(invalid)?,
            Payload::Image(_) | Payload::Continuous(_) => {}
        }
        Ok(())
    }
}

impl RelationalView {
    fn check(&self) -> Result<(), String> {
        if self.attributes.is_empty() {
            return Err("relational view declares no attribute".into());
        }
        let mut seen = std::collections::HashSet::new();
        for a in &self.attributes {
            if a.att_name.is_empty() {
                return Err("attribute with an empty name".into());
            }
            if !seen.insert(a.att_name.as_str()) {
                return Err(format!("attribute `{}` declared twice", a.att_name));
            }
        }
        for (i, t) in self.tuples.iter().enumerate() {
            if t.cells.is_empty() {
                return Err(format!("tuple {} has no cell", i + 1));
            }
            if let Some(c) = t
                .cells
                .iter()
                .find(|c| !seen.contains(c.att_name_ref.as_str()))
            {
                return Err(format!(
                    "tuple {} references undeclared attribute `{}`",
                    i + 1,
                    c.att_name_ref
                ));
            }
        }
        Ok(())
    }
}

pub fn parse_date(text: &str) -> Result<NaiveDate, ModelError> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d")
        .map_err(|_| ModelError::InvalidDate(text.to_string()))
}

/// Builds a validated complex object. A missing date defaults to today (UTC).
pub fn make_complex_object(
    obj_name: &str,
    date: Option<&str>,
    source: &str,
    subdocuments: Vec<Subdocument>,
) -> Result<ComplexObject, ModelError> {
    if subdocuments.is_empty() {
        return Err(ModelError::EmptySubdocuments);
    }
    if obj_name.is_empty() {
        return Err(ModelError::EmptyObjectName);
    }
    let date = match date {
        Some(text) => parse_date(text)?,
        None => chrono::Utc::now().date_naive(),
    };
    let mut subdocuments = subdocuments;
    for (i, sub) in subdocuments.iter_mut().enumerate() {
        sub.check(i)?;
        // an empty compression/resolution serializes the same as an absent one
        if let Payload::Image(img) = &mut sub.payload {
            img.compression = img.compression.take().filter(|s| !s.is_empty());
            img.resolution = img.resolution.take().filter(|s| !s.is_empty());
        }
    }
    Ok(ComplexObject {
        obj_name: obj_name.to_string(),
        date,
        source: source.to_string(),
        subdocuments,
    })
}
