use std::path::Path;

use super::{detect_kind, extract_links, read_file, ExtractError, SubdocumentKind};
use crate::model::{TextBody, TextPayload};

/// Reads a plain or tagged text file; the kind comes from the extension.
pub fn extract_text(path: &Path) -> Result<TextPayload, ExtractError> {
    let tagged = match detect_kind(path)? {
        SubdocumentKind::Text => false,
        SubdocumentKind::TaggedText => true,
        _ => {
            return Err(ExtractError::UnknownExtension {
                ext: path
                    .extension()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned(),
            })
        }
    };
    text_payload(&read_file(path)?, tagged)
}

pub fn text_payload(bytes: &[u8], tagged: bool) -> Result<TextPayload, ExtractError> {
    let content = std::str::from_utf8(bytes)
        .map_err(|e| ExtractError::InvalidEncoding {
            offset: e.valid_up_to(),
        })?
        .to_string();
    let nb_char = content.chars().count() as u64;
    // a trailing fragment without '\n' still counts as a line
    let nb_lines = match content.matches('\n').count() as u64 {
        n if content.is_empty() || content.ends_with('\n') => n,
        n => n + 1,
    };
    let body = if tagged {
        let links = extract_links(&content);
        TextBody::Tagged { content, links }
    } else {
        TextBody::Plain(content)
    };
    Ok(TextPayload {
        nb_char,
        nb_lines,
        body,
    })
}
