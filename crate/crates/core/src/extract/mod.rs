//! Attribute extraction, one treatment per subdocument class.
//!
//! Three capture routes feed a subdocument: sidecar files (manual capture),
//! the built-in text/CSV readers, and the binary image header readers.

use std::path::Path;

use thiserror::Error;

use crate::model::{ContinuousMeta, DocType, Media, Payload, Subdocument};
use crate::sidecar::{apply_sidecar, SidecarError, SidecarRecord};

mod image;
mod links;
mod relational;
mod text;

pub use image::{extract_image, image_meta};
pub use links::extract_links;
pub use relational::{ingest_relational_view, relational_view, Delimiter};
pub use text::{extract_text, text_payload};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("unknown extension `{ext}` (supported: {})", SUPPORTED.join(", "))]
    UnknownExtension { ext: String },
    #[error("cannot read `{path}`: {source}")]
    FileNotReadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidEncoding { offset: usize },
    #[error("unsupported image format (unrecognized magic number)")]
    UnsupportedFormat,
    #[error("corrupt image header: {0}")]
    CorruptHeader(&'static str),
    #[error("no header row")]
    EmptyHeader,
    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("header: {0}")]
    BadHeader(String),
    #[error("malformed delimited data: {0}")]
    Csv(String),
    #[error("sidecar field `{0}` is required for continuous media")]
    MissingSidecarField(&'static str),
    #[error("`{0:?}` is not a continuous media kind")]
    NotContinuous(SubdocumentKind),
    #[error(transparent)]
    Sidecar(#[from] SidecarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubdocumentKind {
    Text,
    TaggedText,
    Image,
    RelationalView,
    Sound,
    Video,
}

const EXTENSIONS: &[(&str, SubdocumentKind)] = &[
    ("txt", SubdocumentKind::Text),
    ("htm", SubdocumentKind::TaggedText),
    ("html", SubdocumentKind::TaggedText),
    ("xml", SubdocumentKind::TaggedText),
    ("sgml", SubdocumentKind::TaggedText),
    ("gif", SubdocumentKind::Image),
    ("png", SubdocumentKind::Image),
    ("jpg", SubdocumentKind::Image),
    ("jpeg", SubdocumentKind::Image),
    ("csv", SubdocumentKind::RelationalView),
    ("tsv", SubdocumentKind::RelationalView),
    ("wav", SubdocumentKind::Sound),
    ("mp3", SubdocumentKind::Sound),
    ("avi", SubdocumentKind::Video),
    ("mpg", SubdocumentKind::Video),
    ("mpeg", SubdocumentKind::Video),
    ("mp4", SubdocumentKind::Video),
];

const SUPPORTED: &[&str] = &[
    "txt", "htm", "html", "xml", "sgml", "gif", "png", "jpg", "jpeg", "csv", "tsv", "wav", "mp3",
    "avi", "mpg", "mpeg", "mp4",
];

impl SubdocumentKind {
    pub fn doc_type(self) -> DocType {
        match self {
            SubdocumentKind::Text | SubdocumentKind::TaggedText => DocType::Text,
            SubdocumentKind::Image => DocType::Image,
            SubdocumentKind::RelationalView => DocType::RelationalView,
            SubdocumentKind::Sound => DocType::Sound,
            SubdocumentKind::Video => DocType::Video,
        }
    }
}

pub fn detect_kind(path: &Path) -> Result<SubdocumentKind, ExtractError> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    EXTENSIONS
        .iter()
        .find(|(e, _)| *e == ext)
        .map(|(_, k)| *k)
        .ok_or(ExtractError::UnknownExtension { ext })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonMeta {
    pub doc_name: String,
    pub doc_type: DocType,
    pub size: u64,
    pub location: String,
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, ExtractError> {
    std::fs::read(path).map_err(|source| ExtractError::FileNotReadable {
        path: path.display().to_string(),
        source,
    })
}

fn common_from(
    path: &Path,
    kind: SubdocumentKind,
    len: usize,
    doc_name: Option<&str>,
) -> CommonMeta {
    let doc_name = doc_name.map(String::from).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    CommonMeta {
        doc_name,
        doc_type: kind.doc_type(),
        size: len as u64,
        location: path.to_string_lossy().into_owned(),
    }
}

pub fn extract_common(path: &Path, doc_name: Option<&str>) -> Result<CommonMeta, ExtractError> {
    let kind = detect_kind(path)?;
    let len = std::fs::metadata(path)
        .and_then(|m| {
            if m.is_file() {
                Ok(m.len())
            } else {
                Err(std::io::Error::other("not a regular file"))
            }
        })
        .map_err(|source| ExtractError::FileNotReadable {
            path: path.display().to_string(),
            source,
        })?;
    Ok(common_from(path, kind, len as usize, doc_name))
}

/// Continuous media are not decoded: duration and speed come from the sidecar.
pub fn extract_continuous(
    path: &Path,
    kind: SubdocumentKind,
    sidecar: &SidecarRecord,
) -> Result<ContinuousMeta, ExtractError> {
    let reference = path.to_string_lossy().into_owned();
    let media = match kind {
        SubdocumentKind::Sound => Media::Sound(reference),
        SubdocumentKind::Video => Media::Video(reference),
        other => return Err(ExtractError::NotContinuous(other)),
    };
    let duration = sidecar
        .duration()?
        .ok_or(ExtractError::MissingSidecarField("duration"))?;
    let speed = sidecar
        .get("speed")
        .ok_or(ExtractError::MissingSidecarField("speed"))?;
    Ok(ContinuousMeta {
        duration: duration.to_string(),
        speed: speed.to_string(),
        media,
    })
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub doc_name: Option<String>,
    pub query: Option<String>,
    pub intention_only: bool,
    pub sidecar: SidecarRecord,
}

/// Runs the full extraction for one file and overlays the sidecar.
pub fn extract_subdocument(path: &Path, opts: &IngestOptions) -> Result<Subdocument, ExtractError> {
    let kind = detect_kind(path)?;
    opts.sidecar.check_keys()?;
    let bytes = read_file(path)?;
    let common = common_from(path, kind, bytes.len(), opts.doc_name.as_deref());
    let payload = match kind {
        SubdocumentKind::Text | SubdocumentKind::TaggedText => {
            Payload::Text(text_payload(&bytes, kind == SubdocumentKind::TaggedText)?)
        }
        SubdocumentKind::Image => Payload::Image(image_meta(&bytes)?),
        SubdocumentKind::RelationalView => {
            let query = opts.query.as_deref().or(opts.sidecar.get("query"));
            Payload::RelationalView(relational_view(
                &bytes,
                Delimiter::for_path(path),
                query,
                opts.intention_only,
                &opts.sidecar,
            )?)
        }
        SubdocumentKind::Sound | SubdocumentKind::Video => {
            Payload::Continuous(extract_continuous(path, kind, &opts.sidecar)?)
        }
    };
    let sub = Subdocument {
        doc_name: common.doc_name,
        size: common.size,
        location: common.location,
        language: None,
        keywords: Vec::new(),
        payload,
    };
    Ok(apply_sidecar(sub, &opts.sidecar)?)
}
