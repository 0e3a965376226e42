mod common;

use common::*;
use webhouse::dtd::{validate, DtdSchema};
use webhouse::ods::shred;
use webhouse::xml::parse_document;

fn check_seeds(schema: &DtdSchema, seeds: std::ops::Range<u64>) {
    let rschema = relational(schema);
    for seed in seeds {
        let doc = generate(schema, &mut rng(seed));
        let (canonical, exported) = round_trip(&doc, schema, &rschema);
        assert_eq!(exported, canonical, "seed {seed}");
    }
}

#[test]
fn bundled_schema_round_trips() {
    check_seeds(&bundled(), 0..150);
}

#[test]
fn bibliography_round_trips() {
    check_seeds(&bibliography(), 0..150);
}

#[test]
fn generated_documents_are_valid() {
    for schema in [bundled(), bibliography()] {
        for seed in 0..100 {
            let doc = generate(&schema, &mut rng(seed));
            let report = validate(&doc, &schema);
            assert!(report.is_valid(), "seed {seed}: {report}");
        }
    }
}

#[test]
fn rows_conserve_elements() {
    for schema in [bundled(), bibliography()] {
        let rschema = relational(&schema);
        for seed in 0..100 {
            let doc = generate(&schema, &mut rng(seed));
            let parsed = parse_document(&webhouse::xml::write_document(&doc, "t.dtd"))
                .unwrap()
                .root;
            let rows = shred(&parsed, &schema, &rschema).unwrap();
            assert_eq!(
                rows.element_count(&rschema),
                parsed.count_elements(),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn generic_models_round_trip() {
    // optional groups, nested repeats, choices over groups, a leaf root
    let dtds = [
        "<!ELEMENT R ((A, B)?, (C | (D, E*))*, F+)>
         <!ELEMENT A (#PCDATA)> <!ELEMENT B (#PCDATA)> <!ELEMENT C (#PCDATA)>
         <!ELEMENT D (G?)> <!ELEMENT E (#PCDATA)> <!ELEMENT F ((H, I)+)>
         <!ELEMENT G (#PCDATA)> <!ELEMENT H (#PCDATA)> <!ELEMENT I (#PCDATA)>",
        "<!ELEMENT R ((A?)*, (B | C)?)> <!ELEMENT A (#PCDATA)> <!ELEMENT B (#PCDATA)> <!ELEMENT C (X)> <!ELEMENT X (#PCDATA)>",
        "<!ELEMENT NOTE (#PCDATA)>",
    ];
    for dtd in dtds {
        let schema = webhouse::dtd::parse_dtd(dtd).unwrap();
        check_seeds(&schema, 0..60);
    }
}
