//! File-based capture of metadata that cannot be read from the data itself.
//!
//! A sidecar is a UTF-8 text file with one `key: value` pair per line. Keys
//! are case-insensitive, `keyword` may repeat, and lines starting with `#`
//! are comments.

use thiserror::Error;

use crate::model::{Payload, Subdocument};

pub const ALLOWED_KEYS: &[&str] = &[
    "keyword",
    "language",
    "resolution",
    "compression",
    "duration",
    "speed",
    "query",
    "domain.<att_name>",
    "name",
    "source",
    "date",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SidecarError {
    #[error("sidecar line {line}: expected `key: value`")]
    Malformed { line: usize },
    #[error("unknown sidecar key `{0}`")]
    UnknownSidecarKey(String),
    #[error("sidecar value for `{key}` is invalid: `{value}`")]
    InvalidValue { key: String, value: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SidecarRecord {
    entries: Vec<(String, String)>,
}

impl SidecarRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, SidecarError> {
        let mut record = SidecarRecord::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or(SidecarError::Malformed { line: i + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(SidecarError::Malformed { line: i + 1 });
            }
            record.push(key, value.trim());
        }
        Ok(record)
    }

    pub fn push(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_lowercase(), value.to_string()));
    }

    pub fn extend(&mut self, other: &SidecarRecord) {
        self.entries.extend(other.entries.iter().cloned());
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Last value given for `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn domain(&self, att_name: &str) -> Option<&str> {
        self.get(&format!("domain.{}", att_name.to_lowercase()))
    }

    pub fn check_keys(&self) -> Result<(), SidecarError> {
        for (key, _) in &self.entries {
            let known = match key.strip_prefix("domain.") {
                Some(att) => !att.is_empty(),
                None => ALLOWED_KEYS.contains(&key.as_str()) && key != "domain.<att_name>",
            };
            if !known {
                return Err(SidecarError::UnknownSidecarKey(key.clone()));
            }
        }
        Ok(())
    }

    pub(crate) fn duration(&self) -> Result<Option<&str>, SidecarError> {
        match self.get("duration") {
            None => Ok(None),
            Some(v) => match v.parse::<f64>() {
                Ok(d) if d.is_finite() && d >= 0.0 => Ok(Some(v)),
                _ => Err(SidecarError::InvalidValue {
                    key: "duration".into(),
                    value: v.into(),
                }),
            },
        }
    }
}

/// Overlays captured metadata onto an extracted subdocument.
///
/// Keys that do not apply to the payload (e.g. `speed` on an image) are
/// ignored, so one sidecar can serve a composite ingestion. `source` and
/// `date` belong to the complex object and are ignored here; `name` sets
/// the subdocument name.
pub fn apply_sidecar(
    mut subdoc: Subdocument,
    sidecar: &SidecarRecord,
) -> Result<Subdocument, SidecarError> {
    sidecar.check_keys()?;
    if let Some(name) = sidecar.get("name") {
        subdoc.doc_name = name.to_string();
    }
    let keywords = sidecar.all("keyword");
    if !keywords.is_empty() {
        subdoc.keywords = keywords.into_iter().map(String::from).collect();
    }
    if let Some(lang) = sidecar.get("language") {
        subdoc.language = Some(lang.to_string());
    }
    match &mut subdoc.payload {
        Payload::Image(img) => {
            if let Some(v) = sidecar.get("resolution") {
                img.resolution = Some(v.to_string()).filter(|s| !s.is_empty());
            }
            if let Some(v) = sidecar.get("compression") {
                img.compression = Some(v.to_string()).filter(|s| !s.is_empty());
            }
        }
        Payload::Continuous(c) => {
            if let Some(v) = sidecar.duration()? {
                c.duration = v.to_string();
            }
            if let Some(v) = sidecar.get("speed") {
                c.speed = v.to_string();
            }
        }
        Payload::RelationalView(view) => {
            if let Some(q) = sidecar.get("query") {
                view.query = Some(q.to_string());
            }
            for att in &mut view.attributes {
                if let Some(d) = sidecar.domain(&att.att_name) {
                    att.domain = d.to_string();
                }
            }
        }
        Payload::Text(_) => {}
    }
    Ok(subdoc)
}
