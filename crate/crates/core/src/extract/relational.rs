use std::collections::HashSet;
use std::path::Path;

use super::{read_file, ExtractError};
use crate::model::{Attribute, Cell, RelationalView, Tuple};
use crate::sidecar::SidecarRecord;

pub const DEFAULT_DOMAIN: &str = "string";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    pub fn for_path(path: &Path) -> Delimiter {
        match path.extension() {
            Some(e) if e.eq_ignore_ascii_case("tsv") => Delimiter::Tab,
            _ => Delimiter::Comma,
        }
    }

    fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

pub fn ingest_relational_view(
    data_path: &Path,
    query: Option<&str>,
    intention_only: bool,
    sidecar: &SidecarRecord,
) -> Result<RelationalView, ExtractError> {
    let bytes = read_file(data_path)?;
    relational_view(
        &bytes,
        Delimiter::for_path(data_path),
        query,
        intention_only,
        sidecar,
    )
}

/// Header names become the intention; each data row becomes one tuple
/// with its cells in header order.
pub fn relational_view(
    data: &[u8],
    delimiter: Delimiter,
    query: Option<&str>,
    intention_only: bool,
    sidecar: &SidecarRecord,
) -> Result<RelationalView, ExtractError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter.byte())
        .from_reader(data);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(ExtractError::EmptyHeader),
        Some(r) => r.map_err(|e| ExtractError::Csv(e.to_string()))?,
    };
    let mut seen = HashSet::new();
    let mut attributes = Vec::with_capacity(header.len());
    for name in header.iter() {
        if name.is_empty() {
            return Err(ExtractError::BadHeader("empty attribute name".into()));
        }
        if !seen.insert(name) {
            return Err(ExtractError::BadHeader(format!(
                "attribute `{name}` appears twice"
            )));
        }
        attributes.push(Attribute {
            att_name: name.to_string(),
            domain: sidecar.domain(name).unwrap_or(DEFAULT_DOMAIN).to_string(),
        });
    }
    let mut tuples = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record.map_err(|e| ExtractError::Csv(e.to_string()))?;
        if record.len() != attributes.len() {
            return Err(ExtractError::RaggedRow {
                row: i + 1,
                expected: attributes.len(),
                found: record.len(),
            });
        }
        if intention_only {
            continue;
        }
        let cells = attributes
            .iter()
            .zip(record.iter())
            .map(|(a, v)| Cell {
                att_name_ref: a.att_name.clone(),
                value: v.to_string(),
            })
            .collect();
        tuples.push(Tuple { cells });
    }
    Ok(RelationalView {
        query: query.map(String::from),
        attributes,
        tuples,
    })
}
