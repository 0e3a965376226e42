//! Element trees, the document reader and the canonical writer.
//!
//! Documents use elements and character data only. The canonical form is
//! the XML declaration, a `DOCTYPE` line, then one element per line with
//! 2-space indentation and leaf content inline.

use std::fmt::Write as _;

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

pub const XML_DECLARATION: &str = r#"<?xml version="1.0" encoding="UTF-8"?>"#;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XmlError {
    #[error("line {line}: not well-formed: {reason}")]
    NotWellFormed { line: usize, reason: String },
    #[error("line {line}: unsupported construct: {kind}")]
    UnsupportedConstruct { line: usize, kind: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub children: Vec<Node>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element {
            name: name.into(),
            children: Vec::new(),
        }
    }

    /// A character-data element; empty text gives an empty element.
    pub fn leaf(name: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let children = if text.is_empty() {
            Vec::new()
        } else {
            vec![Node::Text(text)]
        };
        Element {
            name: name.into(),
            children,
        }
    }

    pub fn with_children(name: impl Into<String>, children: Vec<Element>) -> Self {
        Element {
            name: name.into(),
            children: children.into_iter().map(Node::Element).collect(),
        }
    }

    pub fn push(&mut self, child: Element) {
        self.children.push(Node::Element(child));
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }

    fn has_elements(&self) -> bool {
        self.children.iter().any(|n| matches!(n, Node::Element(_)))
    }

    /// Number of elements in this subtree, itself included.
    pub fn count_elements(&self) -> usize {
        1 + self.elements().map(Element::count_elements).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// Name from the `DOCTYPE` declaration, when present.
    pub doctype: Option<String>,
    pub root: Element,
}

fn line_at(text: &str, offset: usize) -> usize {
    let offset = offset.min(text.len());
    text.as_bytes()[..offset]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

/// Reads a document made of elements and character data.
///
/// Comments and processing instructions are skipped; attributes are
/// rejected. Whitespace-only text is dropped from elements that contain
/// child elements and kept verbatim in leaf elements.
pub fn parse_document(text: &str) -> Result<Document, XmlError> {
    let mut reader = Reader::from_str(text);
    let mut doctype = None;
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    let not_wf = |pos: u64, reason: String| XmlError::NotWellFormed {
        line: line_at(text, pos as usize),
        reason,
    };

    loop {
        let before = reader.buffer_position();
        let event = reader
            .read_event()
            .map_err(|e| not_wf(reader.error_position(), e.to_string()))?;
        match event {
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) => {}
            Event::DocType(t) => {
                if root.is_some() || !stack.is_empty() {
                    return Err(not_wf(before, "DOCTYPE after the root element".into()));
                }
                doctype = t.split_whitespace().next().map(String::from);
            }
            ev @ (Event::Start(_) | Event::Empty(_)) => {
                let (start, empty) = match &ev {
                    Event::Start(s) => (s, false),
                    Event::Empty(s) => (s, true),
                    _ => unreachable!(),
                };
                if start.attributes().next().is_some() {
                    return Err(XmlError::UnsupportedConstruct {
                        line: line_at(text, before as usize),
                        kind: "attribute",
                    });
                }
                let name = start.name().as_ref().to_string();
                if stack.is_empty() && root.is_some() {
                    return Err(not_wf(before, "more than one root element".into()));
                }
                let el = Element::new(name);
                if empty {
                    attach(&mut stack, &mut root, el);
                } else {
                    stack.push(el);
                }
            }
            Event::End(_) => {
                let mut el = stack
                    .pop()
                    .ok_or_else(|| not_wf(before, "unexpected end tag".into()))?;
                if el.has_elements() {
                    el.children
                        .retain(|n| !matches!(n, Node::Text(t) if t.trim().is_empty()));
                }
                attach(&mut stack, &mut root, el);
            }
            Event::Text(t) => {
                let content = t.xml10_content();
                push_text(&mut stack, &content).map_err(|r| not_wf(before, r))?;
            }
            Event::CData(t) => {
                let content = t.to_string();
                push_text(&mut stack, &content).map_err(|r| not_wf(before, r))?;
            }
            Event::GeneralRef(r) => {
                let resolved = if r.is_char_ref() {
                    r.resolve_char_ref()
                        .map_err(|e| not_wf(before, e.to_string()))?
                        .map(String::from)
                } else {
                    quick_xml::escape::resolve_predefined_entity(&r).map(String::from)
                };
                let resolved = resolved
                    .ok_or_else(|| not_wf(before, format!("undefined entity `&{};`", &*r)))?;
                if stack.is_empty() {
                    return Err(not_wf(before, "reference outside the root element".into()));
                }
                push_text(&mut stack, &resolved).map_err(|r| not_wf(before, r))?;
            }
            Event::Eof => break,
        }
    }
    if let Some(open) = stack.last() {
        return Err(not_wf(
            text.len() as u64,
            format!("element `{}` is not closed", open.name),
        ));
    }
    let root = root.ok_or_else(|| not_wf(text.len() as u64, "no root element".into()))?;
    Ok(Document { doctype, root })
}

fn attach(stack: &mut [Element], root: &mut Option<Element>, el: Element) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(Node::Element(el)),
        None => *root = Some(el),
    }
}

fn push_text(stack: &mut [Element], content: &str) -> Result<(), String> {
    let Some(parent) = stack.last_mut() else {
        if content.trim().is_empty() {
            return Ok(());
        }
        return Err("character data outside the root element".into());
    };
    match parent.children.last_mut() {
        Some(Node::Text(prev)) => prev.push_str(content),
        _ => parent.children.push(Node::Text(content.to_string())),
    }
    Ok(())
}

/// Escapes character data. Carriage returns and other control characters
/// become character references so that they survive end-of-line handling.
pub fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\n' | '\t' => out.push(c),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "&#{};", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn write_element(el: &Element, depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    if el.has_elements() {
        let _ = writeln!(out, "<{}>", el.name);
        for child in el.elements() {
            write_element(child, depth + 1, out);
        }
        for _ in 0..depth {
            out.push_str("  ");
        }
        let _ = writeln!(out, "</{}>", el.name);
    } else {
        let text = el.text();
        if text.is_empty() {
            let _ = writeln!(out, "<{}/>", el.name);
        } else {
            let _ = write!(out, "<{}>", el.name);
            escape_text(&text, out);
            let _ = writeln!(out, "</{}>", el.name);
        }
    }
}

/// Canonical text of a document rooted at `root`. Character data mixed
/// into elements that have child elements is not written.
pub fn write_document(root: &Element, system_id: &str) -> String {
    let mut out = String::new();
    out.push_str(XML_DECLARATION);
    out.push('\n');
    let _ = writeln!(out, r#"<!DOCTYPE {} SYSTEM "{}">"#, root.name, system_id);
    write_element(root, 0, &mut out);
    out
}
