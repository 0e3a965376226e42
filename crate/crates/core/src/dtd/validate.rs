use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{ContentModel, DtdSchema, Multiplicity};
use crate::xml::{Element, Node};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// e.g. `/COMPLEX_OBJECT/SUBDOCUMENT[2]/IMAGE[1]`
    pub path: String,
    pub message: String,
    /// The content model fragment the element failed to satisfy.
    pub expected: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} (expected {})",
            self.path, self.message, self.expected
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// How an element's children were matched against its content model.
/// `Element` holds the index into the element children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Match {
    Element(usize),
    Sequence(Vec<Match>),
    Choice(usize, Box<Match>),
    Repeat(Vec<Match>),
}

/// Matches a list of child element names against a content model.
pub(crate) fn match_content(model: &ContentModel, names: &[&str]) -> Option<Match> {
    let mut furthest = 0;
    matches(model, names, 0, &mut furthest)
        .into_iter()
        .find(|(end, _)| *end == names.len())
        .map(|(_, m)| m)
}

fn furthest_match(model: &ContentModel, names: &[&str]) -> usize {
    let mut furthest = 0;
    matches(model, names, 0, &mut furthest);
    furthest
}

/// Every way `model` can match a prefix of `names[start..]`, at most one
/// match per end position (the first found).
fn matches(
    model: &ContentModel,
    names: &[&str],
    start: usize,
    furthest: &mut usize,
) -> Vec<(usize, Match)> {
    let found = match model {
        ContentModel::PcData => vec![(start, Match::Sequence(Vec::new()))],
        ContentModel::Element(n) => match names.get(start) {
            Some(name) if name == n => vec![(start + 1, Match::Element(start))],
            _ => Vec::new(),
        },
        ContentModel::Sequence(items) => {
            let mut states: Vec<(usize, Vec<Match>)> = vec![(start, Vec::new())];
            for item in items {
                let mut next: BTreeMap<usize, Vec<Match>> = BTreeMap::new();
                for (pos, done) in &states {
                    for (end, m) in matches(item, names, *pos, furthest) {
                        next.entry(end).or_insert_with(|| {
                            let mut v = done.clone();
                            v.push(m);
                            v
                        });
                    }
                }
                states = next.into_iter().collect();
                if states.is_empty() {
                    break;
                }
            }
            states
                .into_iter()
                .map(|(e, v)| (e, Match::Sequence(v)))
                .collect()
        }
        ContentModel::Choice(alts) => {
            let mut out: BTreeMap<usize, Match> = BTreeMap::new();
            for (i, alt) in alts.iter().enumerate() {
                for (end, m) in matches(alt, names, start, furthest) {
                    out.entry(end)
                        .or_insert_with(|| Match::Choice(i, Box::new(m)));
                }
            }
            out.into_iter().collect()
        }
        ContentModel::Repeat(inner, mult) => {
            let mut out: BTreeMap<usize, Vec<Match>> = BTreeMap::new();
            if *mult != Multiplicity::Plus {
                out.insert(start, Vec::new());
            }
            let mut frontier: Vec<(usize, Vec<Match>)> = vec![(start, Vec::new())];
            let mut first_round = true;
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for (pos, done) in &frontier {
                    for (end, m) in matches(inner, names, *pos, furthest) {
                        // later iterations must consume something
                        if (end == *pos && !first_round) || out.contains_key(&end) {
                            continue;
                        }
                        let mut v = done.clone();
                        v.push(m);
                        out.insert(end, v.clone());
                        if end > *pos {
                            next.push((end, v));
                        }
                    }
                }
                first_round = false;
                if !mult.repeats() {
                    break;
                }
                frontier = next;
            }
            out.into_iter()
                .map(|(e, v)| (e, Match::Repeat(v)))
                .collect()
        }
    };
    if let Some(max) = found.iter().map(|(e, _)| *e).max() {
        *furthest = (*furthest).max(max);
    }
    found
}

/// Checks a document tree against a schema; failures are report entries.
pub fn validate(root: &Element, schema: &DtdSchema) -> ValidationReport {
    let mut report = ValidationReport::default();
    let path = format!("/{}", root.name);
    if root.name != schema.root() {
        report.violations.push(Violation {
            path: path.clone(),
            message: format!("root element is `{}`", root.name),
            expected: format!("root element `{}`", schema.root()),
        });
    }
    check_element(root, schema, &path, &mut report);
    report
}

fn check_element(el: &Element, schema: &DtdSchema, path: &str, report: &mut ValidationReport) {
    let Some(model) = schema.model(&el.name) else {
        report.violations.push(Violation {
            path: path.into(),
            message: format!("element `{}` is not declared", el.name),
            expected: "a declared element".into(),
        });
        return;
    };
    let children: Vec<&Element> = el.elements().collect();
    if model.is_pcdata() {
        if let Some(child) = children.first() {
            report.violations.push(Violation {
                path: path.into(),
                message: format!("leaf element contains child element `{}`", child.name),
                expected: model.to_string(),
            });
        }
        return;
    }
    let stray_text = el
        .children
        .iter()
        .any(|n| matches!(n, Node::Text(t) if !t.trim().is_empty()));
    if stray_text {
        report.violations.push(Violation {
            path: path.into(),
            message: "character data is not allowed here".into(),
            expected: model.to_string(),
        });
    }
    let names: Vec<&str> = children.iter().map(|c| c.name.as_str()).collect();
    if match_content(model, &names).is_none() {
        let at = furthest_match(model, &names);
        let message = match names.get(at) {
            Some(n) => format!(
                "unexpected `{n}` at child {} in ({})",
                at + 1,
                names.join(", ")
            ),
            None => format!("content ({}) ends too early", names.join(", ")),
        };
        report.violations.push(Violation {
            path: path.into(),
            message,
            expected: model.to_string(),
        });
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for child in children {
        let n = seen.entry(child.name.as_str()).or_default();
        *n += 1;
        let child_path = format!("{path}/{}[{n}]", child.name);
        check_element(child, schema, &child_path, report);
    }
}
