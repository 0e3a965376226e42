//! Generic DTD handling: element declarations, content models, validation.
//!
//! Only `<!ELEMENT>` declarations are supported. A content model is either
//! `(#PCDATA)` (a leaf element) or a tree of sequences, choices and
//! `? * +` repetitions over element names.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

mod parse;
mod validate;

pub use parse::parse_dtd;
pub(crate) use validate::{match_content, Match};
pub use validate::{validate, ValidationReport, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DtdError {
    #[error("line {line}: expected {expected}, found {found}")]
    SyntaxError {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("element `{element}` references undeclared element `{referenced}`")]
    UndeclaredReference { element: String, referenced: String },
    #[error("line {line}: element `{name}` is declared twice")]
    DuplicateDeclaration { name: String, line: usize },
    #[error("element `{name}` mixes #PCDATA with child elements")]
    MixedContent { name: String },
    #[error("element `{name}`: {keyword} content is not supported")]
    UnsupportedContent { name: String, keyword: String },
    #[error("line {line}: <!{kind}> declarations are not supported")]
    UnsupportedDeclaration { line: usize, kind: String },
    #[error("line {line}: parameter entities are not supported")]
    ParameterEntity { line: usize },
    #[error("no root: every declared element is referenced by another one")]
    NoRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Optional,
    Star,
    Plus,
}

impl Multiplicity {
    pub fn symbol(self) -> char {
        match self {
            Multiplicity::Optional => '?',
            Multiplicity::Star => '*',
            Multiplicity::Plus => '+',
        }
    }

    /// `*` and `+` allow more than one occurrence.
    pub fn repeats(self) -> bool {
        !matches!(self, Multiplicity::Optional)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ContentModel {
    PcData,
    Element(String),
    Sequence(Vec<ContentModel>),
    Choice(Vec<ContentModel>),
    Repeat(Box<ContentModel>, Multiplicity),
}

impl ContentModel {
    pub fn repeat(inner: ContentModel, m: Multiplicity) -> ContentModel {
        ContentModel::Repeat(Box::new(inner), m)
    }

    pub fn is_pcdata(&self) -> bool {
        matches!(self, ContentModel::PcData)
    }

    pub fn nullable(&self) -> bool {
        match self {
            ContentModel::PcData => true,
            ContentModel::Element(_) => false,
            ContentModel::Sequence(items) => items.iter().all(ContentModel::nullable),
            ContentModel::Choice(alts) => alts.iter().any(ContentModel::nullable),
            ContentModel::Repeat(inner, m) => *m != Multiplicity::Plus || inner.nullable(),
        }
    }

    /// Element names that can start a match of this model.
    pub fn first_names(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_first(&mut out);
        out
    }

    fn collect_first<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ContentModel::PcData => {}
            ContentModel::Element(n) => {
                out.insert(n);
            }
            ContentModel::Sequence(items) => {
                for item in items {
                    item.collect_first(out);
                    if !item.nullable() {
                        break;
                    }
                }
            }
            ContentModel::Choice(alts) => alts.iter().for_each(|a| a.collect_first(out)),
            ContentModel::Repeat(inner, _) => inner.collect_first(out),
        }
    }

    /// Every element name referenced, in left-to-right order with repeats.
    pub fn references(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk_refs(&mut out);
        out
    }

    fn walk_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ContentModel::PcData => {}
            ContentModel::Element(n) => out.push(n),
            ContentModel::Sequence(items) | ContentModel::Choice(items) => {
                items.iter().for_each(|i| i.walk_refs(out))
            }
            ContentModel::Repeat(inner, _) => inner.walk_refs(out),
        }
    }

    fn fmt_item(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentModel::PcData => f.write_str("#PCDATA"),
            ContentModel::Element(n) => f.write_str(n),
            ContentModel::Sequence(items) => fmt_group(f, items, ", "),
            ContentModel::Choice(items) => fmt_group(f, items, " | "),
            ContentModel::Repeat(inner, m) => {
                if let ContentModel::Repeat(..) = **inner {
                    f.write_str("(")?;
                    inner.fmt_item(f)?;
                    f.write_str(")")?;
                } else {
                    inner.fmt_item(f)?;
                }
                write!(f, "{}", m.symbol())
            }
        }
    }
}

fn fmt_group(f: &mut fmt::Formatter<'_>, items: &[ContentModel], sep: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        item.fmt_item(f)?;
    }
    f.write_str(")")
}

/// Prints the model as it appears after the element name in a declaration.
impl fmt::Display for ContentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentModel::PcData => f.write_str("(#PCDATA)"),
            ContentModel::Sequence(_) | ContentModel::Choice(_) => self.fmt_item(f),
            ContentModel::Element(n) => write!(f, "({n})"),
            ContentModel::Repeat(inner, m) => match **inner {
                ContentModel::Sequence(_) | ContentModel::Choice(_) => self.fmt_item(f),
                _ => {
                    f.write_str("(")?;
                    inner.fmt_item(f)?;
                    write!(f, "){}", m.symbol())
                }
            },
        }
    }
}

/// A parsed DTD: element declarations in source order plus the root element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtdSchema {
    elements: IndexMap<String, ContentModel>,
    root: String,
}

impl DtdSchema {
    /// Checks the schema invariants and picks the root: the first declared
    /// element no other element references.
    pub fn new(elements: IndexMap<String, ContentModel>) -> Result<Self, DtdError> {
        for (name, model) in &elements {
            let refs = model.references();
            if let Some(missing) = refs.iter().find(|r| !elements.contains_key(**r)) {
                return Err(DtdError::UndeclaredReference {
                    element: name.clone(),
                    referenced: missing.to_string(),
                });
            }
        }
        let mut referenced: HashMap<&str, bool> = HashMap::new();
        for (name, model) in &elements {
            for r in model.references() {
                if r != name {
                    referenced.insert(r, true);
                }
            }
        }
        let root = elements
            .keys()
            .find(|n| !referenced.contains_key(n.as_str()))
            .ok_or(DtdError::NoRoot)?
            .clone();
        Ok(DtdSchema { elements, root })
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn model(&self, name: &str) -> Option<&ContentModel> {
        self.elements.get(name)
    }

    pub fn is_leaf(&self, name: &str) -> bool {
        self.model(name).is_some_and(ContentModel::is_pcdata)
    }

    pub fn elements(&self) -> impl Iterator<Item = (&str, &ContentModel)> {
        self.elements.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// One `<!ELEMENT>` line per declaration, in declaration order.
    pub fn to_dtd_string(&self) -> String {
        self.elements
            .iter()
            .map(|(name, model)| format!("<!ELEMENT {name} {model}>\n"))
            .collect()
    }

    /// Content models that violate determinism: some state of the
    /// position automaton can continue with two positions bearing the same
    /// element name. Returns `(element, conflicting name)` pairs.
    pub fn ambiguities(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (name, model) in &self.elements {
            for conflict in glushkov_conflicts(model) {
                out.push((name.clone(), conflict));
            }
        }
        out
    }
}

struct Positions<'a> {
    names: Vec<&'a str>,
    follow: Vec<BTreeSet<usize>>,
}

struct PosInfo {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

fn positions<'a>(cm: &'a ContentModel, p: &mut Positions<'a>) -> PosInfo {
    match cm {
        ContentModel::PcData => PosInfo {
            nullable: true,
            first: BTreeSet::new(),
            last: BTreeSet::new(),
        },
        ContentModel::Element(n) => {
            let id = p.names.len();
            p.names.push(n);
            p.follow.push(BTreeSet::new());
            PosInfo {
                nullable: false,
                first: [id].into(),
                last: [id].into(),
            }
        }
        ContentModel::Sequence(items) => {
            let mut acc = PosInfo {
                nullable: true,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            };
            for item in items {
                let next = positions(item, p);
                for &l in &acc.last {
                    p.follow[l].extend(next.first.iter().copied());
                }
                if acc.nullable {
                    acc.first.extend(next.first.iter().copied());
                }
                if next.nullable {
                    acc.last.extend(next.last);
                } else {
                    acc.last = next.last;
                }
                acc.nullable &= next.nullable;
            }
            acc
        }
        ContentModel::Choice(alts) => {
            let mut acc = PosInfo {
                nullable: false,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            };
            for alt in alts {
                let info = positions(alt, p);
                acc.nullable |= info.nullable;
                acc.first.extend(info.first);
                acc.last.extend(info.last);
            }
            acc
        }
        ContentModel::Repeat(inner, m) => {
            let mut info = positions(inner, p);
            if m.repeats() {
                for &l in &info.last {
                    p.follow[l].extend(info.first.iter().copied());
                }
            }
            info.nullable |= *m != Multiplicity::Plus;
            info
        }
    }
}

fn glushkov_conflicts(model: &ContentModel) -> Vec<String> {
    let mut p = Positions {
        names: Vec::new(),
        follow: Vec::new(),
    };
    let info = positions(model, &mut p);
    let mut conflicts = BTreeSet::new();
    let mut check = |set: &BTreeSet<usize>| {
        let mut seen = BTreeSet::new();
        for &pos in set {
            if !seen.insert(p.names[pos]) {
                conflicts.insert(p.names[pos].to_string());
            }
        }
    };
    check(&info.first);
    for f in &p.follow {
        check(f);
    }
    conflicts.into_iter().collect()
}
