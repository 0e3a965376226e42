use proptest::prelude::*;
use webhouse::dtd::{parse_dtd, ContentModel, Multiplicity};

const LEAVES: &[&str] = &["A", "B", "C", "D"];

fn model() -> impl Strategy<Value = ContentModel> {
    let leaf = prop::sample::select(LEAVES).prop_map(|n| ContentModel::Element(n.to_string()));
    leaf.prop_recursive(4, 24, 4, |inner| {
        let mult = prop::sample::select(vec![
            Multiplicity::Optional,
            Multiplicity::Star,
            Multiplicity::Plus,
        ]);
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(ContentModel::Sequence),
            prop::collection::vec(inner.clone(), 2..4).prop_map(ContentModel::Choice),
            (inner, mult).prop_map(|(m, k)| ContentModel::repeat(m, k)),
        ]
    })
}

proptest! {
    #[test]
    fn printed_schema_parses_back(m in model()) {
        let mut text = format!("<!ELEMENT R {m}>\n");
        for l in LEAVES {
            text.push_str(&format!("<!ELEMENT {l} (#PCDATA)>\n"));
        }
        let schema = parse_dtd(&text).unwrap();
        prop_assert_eq!(schema.model("R").unwrap(), &m);
        let again = parse_dtd(&schema.to_dtd_string()).unwrap();
        prop_assert_eq!(again, schema);
    }
}

#[test]
fn bundled_schema_is_a_fixpoint() {
    let schema = parse_dtd(webhouse::MLFD_DTD).unwrap();
    let printed = schema.to_dtd_string();
    assert_eq!(parse_dtd(&printed).unwrap(), schema);
    assert_eq!(parse_dtd(&printed).unwrap().to_dtd_string(), printed);
}
