/// Collects every `href` and `src` attribute value, in document order.
///
/// The scan works tag by tag and never needs well-formed markup. Values are
/// returned verbatim (no entity decoding, no URL resolution); duplicates are
/// kept and empty values dropped.
pub fn extract_links(content: &str) -> Vec<String> {
    let bytes = content.as_bytes();
    let mut links = Vec::new();
    let mut i = 0;
    while let Some(off) = content[i..].find('<') {
        i += off + 1;
        if content[i..].starts_with("!--") {
            i = match content[i + 3..].find("-->") {
                Some(end) => i + 3 + end + 3,
                None => bytes.len(),
            };
            continue;
        }
        match bytes.get(i) {
            Some(b) if b.is_ascii_alphabetic() => {}
            _ => continue,
        }
        i = scan_tag(content, i, &mut links);
    }
    links
}

/// Scans one start tag beginning at its name; returns the index after it.
fn scan_tag(content: &str, mut i: usize, links: &mut Vec<String>) -> usize {
    let bytes = content.as_bytes();
    let n = bytes.len();
    let is_sep = |b: u8| b.is_ascii_whitespace() || b == b'>' || b == b'/' || b == b'=';
    while i < n && !is_sep(bytes[i]) {
        i += 1;
    }
    loop {
        while i < n && (bytes[i].is_ascii_whitespace() || bytes[i] == b'/') {
            i += 1;
        }
        if i >= n {
            return n;
        }
        if bytes[i] == b'>' {
            return i + 1;
        }
        if bytes[i] == b'<' {
            // unterminated tag, let the outer loop restart here
            return i;
        }
        let name_start = i;
        while i < n && !is_sep(bytes[i]) && bytes[i] != b'<' {
            i += 1;
        }
        let name = &content[name_start..i];
        while i < n && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= n || bytes[i] != b'=' {
            if name_start == i {
                // stray '=' or similar
                i += 1;
            }
            continue;
        }
        i += 1;
        while i < n && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= n {
            return n;
        }
        let value = match bytes[i] {
            q @ (b'"' | b'\'') => {
                let start = i + 1;
                match content[start..].find(q as char) {
                    Some(len) => {
                        i = start + len + 1;
                        &content[start..start + len]
                    }
                    None => return n,
                }
            }
            _ => {
                let start = i;
                while i < n && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                    i += 1;
                }
                &content[start..i]
            }
        };
        if !value.is_empty()
            && (name.eq_ignore_ascii_case("href") || name.eq_ignore_ascii_case("src"))
        {
            links.push(value.to_string());
        }
    }
}
