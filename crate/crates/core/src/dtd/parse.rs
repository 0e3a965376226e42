use indexmap::IndexMap;

use super::{ContentModel, DtdError, DtdSchema, Multiplicity};

/// Parses a sequence of `<!ELEMENT name model>` declarations.
///
/// Comments and processing instructions between declarations are skipped.
/// A parenthesized group holding a single item is the item itself, so
/// `(X)` and `X` denote the same model.
pub fn parse_dtd(text: &str) -> Result<DtdSchema, DtdError> {
    let mut p = Parser { src: text, pos: 0 };
    let mut elements = IndexMap::new();
    loop {
        p.skip_misc()?;
        if p.eof() {
            break;
        }
        let line = p.line();
        if p.eat("<!ELEMENT") {
            let (name, model) = p.element_decl()?;
            if elements.contains_key(&name) {
                return Err(DtdError::DuplicateDeclaration { name, line });
            }
            elements.insert(name, model);
        } else if let Some(kind) = ["ATTLIST", "ENTITY", "NOTATION"]
            .into_iter()
            .find(|k| p.rest().starts_with(&format!("<!{k}")))
        {
            return Err(DtdError::UnsupportedDeclaration {
                line,
                kind: kind.into(),
            });
        } else if p.peek() == Some('%') {
            return Err(DtdError::ParameterEntity { line });
        } else {
            return Err(p.expected("`<!ELEMENT`"));
        }
    }
    if elements.is_empty() {
        return Err(p.expected("an `<!ELEMENT` declaration"));
    }
    DtdSchema::new(elements)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eof(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn line(&self) -> usize {
        self.src[..self.pos].matches('\n').count() + 1
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(_) => {
                let snippet: String = self.rest().chars().take(12).collect();
                format!(
                    "`{}`",
                    snippet.split_whitespace().next().unwrap_or(&snippet)
                )
            }
        }
    }

    fn expected(&self, what: &str) -> DtdError {
        DtdError::SyntaxError {
            line: self.line(),
            expected: what.into(),
            found: self.found(),
        }
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        let trimmed = self.rest().trim_start_matches([' ', '\t', '\r', '\n']);
        self.pos = self.src.len() - trimmed.len();
        self.pos > start
    }

    fn skip_misc(&mut self) -> Result<(), DtdError> {
        loop {
            self.skip_ws();
            if self.rest().starts_with("<!--") {
                let end = self.rest()[4..]
                    .find("-->")
                    .ok_or_else(|| self.expected("`-->` closing the comment"))?;
                self.pos += 4 + end + 3;
            } else if self.rest().starts_with("<?") {
                let end = self
                    .rest()
                    .find("?>")
                    .ok_or_else(|| self.expected("`?>` closing the processing instruction"))?;
                self.pos += end + 2;
            } else {
                return Ok(());
            }
        }
    }

    fn ws_in_markup(&mut self) -> Result<(), DtdError> {
        self.skip_ws();
        if self.peek() == Some('%') {
            return Err(DtdError::ParameterEntity { line: self.line() });
        }
        Ok(())
    }

    fn name(&mut self) -> Result<String, DtdError> {
        let mut chars = self.rest().char_indices();
        match chars.next() {
            Some((_, c)) if is_name_start(c) => {}
            Some((_, '%')) => return Err(DtdError::ParameterEntity { line: self.line() }),
            _ => return Err(self.expected("an element name")),
        }
        let end = chars
            .find(|(_, c)| !is_name_char(*c))
            .map(|(i, _)| i)
            .unwrap_or(self.rest().len());
        let name = self.rest()[..end].to_string();
        self.pos += end;
        Ok(name)
    }

    fn element_decl(&mut self) -> Result<(String, ContentModel), DtdError> {
        if !self.skip_ws() {
            return Err(self.expected("whitespace after `<!ELEMENT`"));
        }
        let name = self.name()?;
        if !self.skip_ws() {
            return Err(self.expected("whitespace after the element name"));
        }
        let model = self.content_spec(&name)?;
        self.ws_in_markup()?;
        if !self.eat(">") {
            return Err(self.expected("`>`"));
        }
        Ok((name, model))
    }

    fn content_spec(&mut self, element: &str) -> Result<ContentModel, DtdError> {
        for keyword in ["EMPTY", "ANY"] {
            if self.eat(keyword) {
                return Err(DtdError::UnsupportedContent {
                    name: element.into(),
                    keyword: keyword.into(),
                });
            }
        }
        if self.peek() == Some('%') {
            return Err(DtdError::ParameterEntity { line: self.line() });
        }
        let save = self.pos;
        if self.eat("(") {
            self.ws_in_markup()?;
            if self.eat("#PCDATA") {
                self.ws_in_markup()?;
                if self.eat(")") {
                    // `(#PCDATA)*` is the same leaf model
                    self.eat("*");
                    return Ok(ContentModel::PcData);
                }
                if matches!(self.peek(), Some('|' | ',')) {
                    return Err(DtdError::MixedContent {
                        name: element.into(),
                    });
                }
                return Err(self.expected("`)`"));
            }
            self.pos = save;
            return self.group(element);
        }
        Err(self.expected("`(`, `EMPTY` or `ANY`"))
    }

    fn group(&mut self, element: &str) -> Result<ContentModel, DtdError> {
        debug_assert!(self.rest().starts_with('('));
        self.pos += 1;
        let mut items = vec![self.item(element)?];
        let mut separator = None;
        loop {
            self.ws_in_markup()?;
            match self.peek() {
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some(c @ (',' | '|')) => {
                    if separator.is_some_and(|s| s != c) {
                        return Err(self.expected("the same separator throughout the group"));
                    }
                    separator = Some(c);
                    self.pos += 1;
                    items.push(self.item(element)?);
                }
                _ => return Err(self.expected("`,`, `|` or `)`")),
            }
        }
        let model = match (items.len(), separator) {
            (1, _) => items.pop().unwrap(),
            (_, Some('|')) => ContentModel::Choice(items),
            _ => ContentModel::Sequence(items),
        };
        Ok(self.multiplicity(model))
    }

    fn item(&mut self, element: &str) -> Result<ContentModel, DtdError> {
        self.ws_in_markup()?;
        if self.rest().starts_with("#PCDATA") {
            return Err(DtdError::MixedContent {
                name: element.into(),
            });
        }
        if self.peek() == Some('(') {
            return self.group(element);
        }
        let name = self.name()?;
        Ok(self.multiplicity(ContentModel::Element(name)))
    }

    fn multiplicity(&mut self, model: ContentModel) -> ContentModel {
        let m = match self.peek() {
            Some('?') => Multiplicity::Optional,
            Some('*') => Multiplicity::Star,
            Some('+') => Multiplicity::Plus,
            _ => return model,
        };
        self.pos += 1;
        ContentModel::repeat(model, m)
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == ':'
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_numeric() || matches!(c, '-' | '.' | '\u{B7}')
}
