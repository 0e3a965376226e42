//! Dimension readers for GIF, PNG and JPEG headers.

use std::path::Path;

use super::{read_file, ExtractError};
use crate::model::ImageMeta;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

pub fn extract_image(path: &Path) -> Result<ImageMeta, ExtractError> {
    image_meta(&read_file(path)?)
}

pub fn image_meta(bytes: &[u8]) -> Result<ImageMeta, ExtractError> {
    let (format, width, length) = if bytes.starts_with(b"GIF87a") || bytes.starts_with(b"GIF89a") {
        let (w, h) = gif_size(bytes)?;
        ("Gif", w, h)
    } else if bytes.starts_with(&PNG_SIGNATURE) {
        let (w, h) = png_size(bytes)?;
        ("Png", w, h)
    } else if bytes.starts_with(&[0xFF, 0xD8]) {
        let (w, h) = jpeg_size(bytes)?;
        ("Jpeg", w, h)
    } else {
        return Err(ExtractError::UnsupportedFormat);
    };
    if width == 0 || length == 0 {
        return Err(ExtractError::CorruptHeader("zero image dimension"));
    }
    Ok(ImageMeta {
        format: format.to_string(),
        compression: None,
        resolution: None,
        length,
        width,
    })
}

fn gif_size(b: &[u8]) -> Result<(u32, u32), ExtractError> {
    // logical screen descriptor follows the 6-byte signature
    if b.len() < 10 {
        return Err(ExtractError::CorruptHeader(
            "GIF shorter than its screen descriptor",
        ));
    }
    let w = u16::from_le_bytes([b[6], b[7]]);
    let h = u16::from_le_bytes([b[8], b[9]]);
    Ok((w.into(), h.into()))
}

fn png_size(b: &[u8]) -> Result<(u32, u32), ExtractError> {
    if b.len() < 24 {
        return Err(ExtractError::CorruptHeader(
            "PNG shorter than its IHDR chunk",
        ));
    }
    if &b[12..16] != b"IHDR" {
        return Err(ExtractError::CorruptHeader("PNG does not start with IHDR"));
    }
    let w = u32::from_be_bytes([b[16], b[17], b[18], b[19]]);
    let h = u32::from_be_bytes([b[20], b[21], b[22], b[23]]);
    Ok((w, h))
}

/// Walks the marker segments up to the first SOF0 (baseline) or SOF2
/// (progressive) frame header.
fn jpeg_size(b: &[u8]) -> Result<(u32, u32), ExtractError> {
    let mut i = 2;
    loop {
        // markers may be preceded by any number of 0xFF fill bytes
        while i < b.len() && b[i] == 0xFF {
            i += 1;
        }
        if i >= b.len() {
            return Err(ExtractError::CorruptHeader(
                "JPEG ends before a frame header",
            ));
        }
        if b[i - 1] != 0xFF {
            return Err(ExtractError::CorruptHeader("JPEG marker expected"));
        }
        let marker = b[i];
        i += 1;
        match marker {
            0x01 | 0xD0..=0xD7 => continue,
            0xD9 | 0xDA => {
                return Err(ExtractError::CorruptHeader(
                    "JPEG has no SOF0/SOF2 frame header",
                ))
            }
            _ => {}
        }
        if i + 2 > b.len() {
            return Err(ExtractError::CorruptHeader("JPEG segment length truncated"));
        }
        let len = u16::from_be_bytes([b[i], b[i + 1]]) as usize;
        if len < 2 {
            return Err(ExtractError::CorruptHeader("JPEG segment length invalid"));
        }
        if marker == 0xC0 || marker == 0xC2 {
            // length(2) precision(1) height(2) width(2)
            if i + 7 > b.len() {
                return Err(ExtractError::CorruptHeader("JPEG frame header truncated"));
            }
            let h = u16::from_be_bytes([b[i + 3], b[i + 4]]);
            let w = u16::from_be_bytes([b[i + 5], b[i + 6]]);
            return Ok((w.into(), h.into()));
        }
        i += len;
    }
}
