//! Seeded generation of valid documents and structural mutants.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use webhouse::dtd::{parse_dtd, ContentModel, DtdSchema, Multiplicity};
use webhouse::mapper::{map_schema, RelationalSchema};
use webhouse::ods::{export, load, shred, OdsStore};
use webhouse::xml::{parse_document, write_document, Element, Node};
use webhouse::MLFD_DTD;

/// Leaf texts: empty, plain, markup-significant, quotes, line breaks,
/// padding and non-ASCII.
pub const ALPHABET: &[&str] = &[
    "",
    "a",
    "surf",
    "black and white",
    "x & y",
    "<tag>",
    "a > b",
    "\"quoted\"",
    "it's",
    "line1\nline2",
    "  spaced  ",
    "caf\u{e9} \u{65e5}\u{672c} \u{1f30a}",
    "\r\n",
];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn bundled() -> DtdSchema {
    parse_dtd(MLFD_DTD).unwrap()
}

pub fn bibliography() -> DtdSchema {
    parse_dtd(&std::fs::read_to_string(fixture("bibliography.dtd")).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random document valid against `schema`. Choices are uniform, `?`
/// yields 0-1 occurrences, `*` 0-3 and `+` 1-3.
pub fn generate(schema: &DtdSchema, rng: &mut impl Rng) -> Element {
    gen_element(schema, schema.root(), rng, 0)
}

fn gen_element(schema: &DtdSchema, name: &str, rng: &mut impl Rng, depth: usize) -> Element {
    assert!(depth < 64, "schema is recursive");
    let model = schema.model(name).unwrap();
    if model.is_pcdata() {
        return Element::leaf(name, *ALPHABET.choose(rng).unwrap());
    }
    let mut el = Element::new(name);
    gen_model(schema, model, rng, depth, &mut el);
    el
}

fn gen_model(
    schema: &DtdSchema,
    model: &ContentModel,
    rng: &mut impl Rng,
    depth: usize,
    out: &mut Element,
) {
    match model {
        ContentModel::PcData => {}
        ContentModel::Element(n) => out.push(gen_element(schema, n, rng, depth + 1)),
        ContentModel::Sequence(items) => items
            .iter()
            .for_each(|i| gen_model(schema, i, rng, depth, out)),
        ContentModel::Choice(alts) => gen_model(schema, alts.choose(rng).unwrap(), rng, depth, out),
        ContentModel::Repeat(inner, m) => {
            let n = match m {
                Multiplicity::Optional => rng.random_range(0..=1),
                Multiplicity::Star => rng.random_range(0..=3),
                Multiplicity::Plus => rng.random_range(1..=3),
            };
            for _ in 0..n {
                gen_model(schema, inner, rng, depth, out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    DropRequired,
    DuplicateSingle,
    RenameRoot,
}

/// How often each name occurs in a model and under which operators.
#[derive(Default, Clone, Copy)]
struct Occurrence {
    count: usize,
    under_repeat_or_choice: bool,
    under_star_plus: bool,
}

fn occurrences(model: &ContentModel) -> HashMap<&str, Occurrence> {
    fn walk<'a>(m: &'a ContentModel, rc: bool, sp: bool, out: &mut HashMap<&'a str, Occurrence>) {
        match m {
            ContentModel::PcData => {}
            ContentModel::Element(n) => {
                let o = out.entry(n).or_default();
                o.count += 1;
                o.under_repeat_or_choice |= rc;
                o.under_star_plus |= sp;
            }
            ContentModel::Sequence(items) => items.iter().for_each(|i| walk(i, rc, sp, out)),
            ContentModel::Choice(items) => items.iter().for_each(|i| walk(i, true, sp, out)),
            ContentModel::Repeat(inner, mult) => walk(inner, true, sp || mult.repeats(), out),
        }
    }
    let mut out = HashMap::new();
    walk(model, false, false, &mut out);
    out
}

/// Candidate (element path, child index) pairs for a mutation kind.
fn candidates(
    schema: &DtdSchema,
    el: &Element,
    path: &mut Vec<usize>,
    kind: Mutation,
    out: &mut Vec<(Vec<usize>, usize)>,
) {
    let Some(model) = schema.model(&el.name) else {
        return;
    };
    let occ = occurrences(model);
    for (i, child) in el.elements().enumerate() {
        let Some(o) = occ.get(child.name.as_str()) else {
            continue;
        };
        let ok = match kind {
            Mutation::DropRequired => o.count == 1 && !o.under_repeat_or_choice,
            Mutation::DuplicateSingle => o.count == 1 && !o.under_star_plus,
            Mutation::RenameRoot => false,
        };
        if ok {
            out.push((path.clone(), i));
        }
    }
    for (i, child) in el.elements().enumerate() {
        path.push(i);
        candidates(schema, child, path, kind, out);
        path.pop();
    }
}

fn element_at<'a>(el: &'a mut Element, path: &[usize]) -> &'a mut Element {
    match path.split_first() {
        None => el,
        Some((&i, rest)) => element_at(nth_child(el, i), rest),
    }
}

fn nth_child(el: &mut Element, i: usize) -> &mut Element {
    el.children
        .iter_mut()
        .filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
        .nth(i)
        .unwrap()
}

fn node_index(el: &Element, i: usize) -> usize {
    el.children
        .iter()
        .enumerate()
        .filter(|(_, n)| matches!(n, Node::Element(_)))
        .nth(i)
        .unwrap()
        .0
}

/// Applies one structural mutation that makes a valid document invalid.
/// Falls back to renaming the root when the chosen kind has no target.
pub fn mutate(schema: &DtdSchema, doc: &Element, rng: &mut impl Rng) -> (Element, Mutation) {
    let mut doc = doc.clone();
    let kind = *[
        Mutation::DropRequired,
        Mutation::DuplicateSingle,
        Mutation::RenameRoot,
    ]
    .choose(rng)
    .unwrap();
    let mut found = Vec::new();
    candidates(schema, &doc, &mut Vec::new(), kind, &mut found);
    let Some((path, i)) = found.choose(rng).cloned() else {
        doc.name = format!("{}_RENAMED", doc.name);
        return (doc, Mutation::RenameRoot);
    };
    let parent = element_at(&mut doc, &path);
    let at = node_index(parent, i);
    match kind {
        Mutation::DropRequired => {
            parent.children.remove(at);
        }
        _ => {
            let copy = parent.children[at].clone();
            parent.children.insert(at + 1, copy);
        }
    }
    (doc, kind)
}

/// Canonical text of `doc`, and the text after shred, load and export.
pub fn round_trip(
    doc: &Element,
    schema: &DtdSchema,
    rschema: &RelationalSchema,
) -> (String, String) {
    let canonical = write_document(doc, "test.dtd");
    // go through the text form so the tree is exactly what a reader sees
    let parsed = parse_document(&canonical).unwrap().root;
    let mut store = OdsStore::new(rschema);
    load(&shred(&parsed, schema, rschema).unwrap(), &mut store).unwrap();
    let exported = export(&store, 1, schema, rschema, "test.dtd").unwrap();
    (canonical, exported)
}

pub fn relational(schema: &DtdSchema) -> RelationalSchema {
    map_schema(schema).unwrap()
}
