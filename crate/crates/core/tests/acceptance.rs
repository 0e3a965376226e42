//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are pinned below.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use webhouse::dtd::{parse_dtd, validate};
use webhouse::extract::{extract_image, extract_text};
use webhouse::mapper::{emit_ddl, map_schema};
use webhouse::xml::parse_document;
use webhouse::MLFD_DTD;

const FAST: Duration = Duration::from_secs(1);
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(30);
const ROUND_TRIP_DOCS: u64 = 200;
const MUTANTS: u64 = 50;
const MIN_IMAGE_FILES: usize = 5;
const SEED_BASE: u64 = 0x5EED_0000;

type Check = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let detail = f()?;
    let took = start.elapsed();
    match budget {
        Some(b) if took >= b => Err(format!("{detail}; took {took:.2?}, budget {b:?}")),
        Some(b) => Ok(format!("{detail}; {took:.2?} < {b:?}")),
        None => Ok(format!("{detail}; {took:.2?}")),
    }
}

fn read_fixture(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap()
}

fn strip_comments(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(String::from)
        .collect()
}

fn dtd_fidelity() -> Check {
    let s = parse_dtd(MLFD_DTD).map_err(|e| e.to_string())?;
    ensure(s.len() == 37, || format!("{} declarations", s.len()))?;
    ensure(s.root() == "COMPLEX_OBJECT", || {
        format!("root {}", s.root())
    })?;
    let expected = [
        ("COMPLEX_OBJECT", "(OBJ_NAME, DATE, SOURCE, SUBDOCUMENT+)"),
        (
            "SUBDOCUMENT",
            "(DOC_NAME, TYPE, SIZE, LOCATION, LANGUAGE?, KEYWORD*, (TEXT | RELATIONAL_VIEW | IMAGE | CONTINUOUS))",
        ),
        ("TEXT", "(NB_CHAR, NB_LINES, (PLAIN_TEXT | TAGGED_TEXT))"),
        ("TUPLE", "(ATT_NAME_REF, VALUE)+"),
        ("CONTINUOUS", "(DURATION, SPEED, (SOUND | VIDEO))"),
    ];
    for (name, model) in expected {
        let got = s.model(name).map(|m| m.to_string()).unwrap_or_default();
        ensure(got == model, || format!("{name} is {got}"))?;
    }
    Ok("37 declarations, root COMPLEX_OBJECT, 5 models checked".into())
}

fn mapping_fidelity() -> Check {
    let schema = parse_dtd(MLFD_DTD).unwrap();
    let r = map_schema(&schema).map_err(|e| e.to_string())?;
    let shape: Vec<String> = r
        .tables
        .iter()
        .map(|t| {
            let cols: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
            format!("{}: {}", t.name, cols.join(", "))
        })
        .collect();
    let expected = strip_comments(&read_fixture("mlfd_tables.txt"));
    ensure(shape == expected, || format!("tables differ: {shape:?}"))?;
    let first = emit_ddl(&r);
    let second = emit_ddl(&map_schema(&parse_dtd(MLFD_DTD).unwrap()).unwrap());
    ensure(first == second, || "DDL differs between runs".into())?;
    ensure(first == read_fixture("mlfd.sql"), || {
        "DDL differs from the recorded statements".into()
    })?;
    Ok(format!(
        "{} tables, DDL byte-identical across runs",
        r.len()
    ))
}

fn webhouse(dir: &Path, args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_webhouse"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || {
        format!(
            "`{}` exited {:?}: {}",
            args[0],
            o.status.code(),
            String::from_utf8_lossy(&o.stderr).trim()
        )
    })
}

fn surf_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(
        fixture("images/gewis_surfer2.gif"),
        dir.path().join("gewis_surfer2.gif"),
    )
    .unwrap();
    fs::copy(fixture("surf.meta"), dir.path().join("surf.meta")).unwrap();
    dir
}

fn ingest_surf(dir: &Path) -> Result<String, String> {
    webhouse(
        dir,
        &[
            "ingest",
            "gewis_surfer2.gif",
            "--name",
            "Sample image",
            "--source",
            "Local",
            "--date",
            "2002-06-15",
            "--sidecar",
            "surf.meta",
            "--out",
            "surf.xml",
        ],
    )?;
    fs::read_to_string(dir.join("surf.xml")).map_err(|e| e.to_string())
}

fn sample_image_reproduction() -> Check {
    let dir = surf_dir();
    let xml = ingest_surf(dir.path())?;
    let size = fs::metadata(dir.path().join("gewis_surfer2.gif"))
        .unwrap()
        .len();
    let gif = fs::read(dir.path().join("gewis_surfer2.gif")).unwrap();
    ensure(gif.starts_with(b"GIF89a"), || {
        "fixture is not GIF89a".into()
    })?;
    for needle in [
        "<WIDTH>344</WIDTH>".to_string(),
        "<LENGTH>219</LENGTH>".to_string(),
        "<COMPRESSION/>".to_string(),
        format!("<SIZE>{size}</SIZE>"),
    ] {
        ensure(xml.contains(&needle), || format!("missing {needle}"))?;
    }
    let keywords: Vec<&str> = xml
        .lines()
        .filter_map(|l| {
            l.trim()
                .strip_prefix("<KEYWORD>")?
                .strip_suffix("</KEYWORD>")
        })
        .collect();
    ensure(keywords == ["surf", "black and white", "wave"], || {
        format!("keywords {keywords:?}")
    })?;
    let doc = parse_document(&xml).map_err(|e| e.to_string())?;
    let report = validate(&doc.root, &bundled());
    ensure(report.is_valid(), || report.to_string())?;
    ensure(xml == read_fixture("sample_image.xml"), || {
        "differs from the normalized sample".into()
    })?;
    Ok(format!(
        "SIZE {size}, exact match with the normalized sample, valid"
    ))
}

fn round_trips(schema: &webhouse::dtd::DtdSchema) -> Check {
    let rschema = relational(schema);
    let mut failures = Vec::new();
    for seed in SEED_BASE..SEED_BASE + ROUND_TRIP_DOCS {
        let doc = generate(schema, &mut rng(seed));
        let (canonical, exported) = round_trip(&doc, schema, &rschema);
        if canonical != exported {
            failures.push(seed);
        }
    }
    ensure(failures.is_empty(), || {
        format!("{} failures, seeds {failures:?}", failures.len())
    })?;
    Ok(format!(
        "{ROUND_TRIP_DOCS}/{ROUND_TRIP_DOCS} documents byte-identical"
    ))
}

fn validation_soundness() -> Check {
    let schema = bundled();
    let mut kinds = Vec::new();
    for seed in SEED_BASE..SEED_BASE + MUTANTS {
        let mut r = rng(seed);
        let doc = generate(&schema, &mut r);
        ensure(validate(&doc, &schema).is_valid(), || {
            format!("original {seed} invalid")
        })?;
        let (mutant, kind) = mutate(&schema, &doc, &mut r);
        ensure(!validate(&mutant, &schema).is_valid(), || {
            format!("mutant {seed} ({kind:?}) accepted")
        })?;
        kinds.push(kind);
    }
    let count = |k| kinds.iter().filter(|&&x| x == k).count();
    Ok(format!(
        "{MUTANTS}/{MUTANTS} mutants rejected (drop {}, duplicate {}, rename {}), originals valid",
        count(Mutation::DropRequired),
        count(Mutation::DuplicateSingle),
        count(Mutation::RenameRoot)
    ))
}

fn extraction_oracles() -> Check {
    let mut texts = 0;
    let mut reader = csv::Reader::from_path(fixture("text/oracle.csv")).unwrap();
    for row in reader.records() {
        let row = row.unwrap();
        let t = extract_text(&fixture("text").join(&row[0])).map_err(|e| e.to_string())?;
        let want: (u64, u64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        ensure((t.nb_char, t.nb_lines) == want, || {
            format!("{}: {:?} != {want:?}", &row[0], (t.nb_char, t.nb_lines))
        })?;
        texts += 1;
    }
    let mut images = 0;
    let mut reader = csv::Reader::from_path(fixture("images/oracle.csv")).unwrap();
    for row in reader.records() {
        let row = row.unwrap();
        let m = extract_image(&fixture("images").join(&row[0])).map_err(|e| e.to_string())?;
        let want: (u32, u32) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        ensure((m.width, m.length) == want, || {
            format!("{}: {:?} != {want:?}", &row[0], (m.width, m.length))
        })?;
        images += 1;
    }
    ensure(images >= MIN_IMAGE_FILES, || {
        format!("only {images} image files")
    })?;
    Ok(format!("{texts} text fixtures, {images} image files match"))
}

fn genericity() -> Check {
    let schema = bibliography();
    let r = relational(&schema);
    let shape: Vec<String> = r
        .tables
        .iter()
        .map(|t| {
            format!(
                "{}: {}",
                t.name,
                t.columns
                    .iter()
                    .map(|c| c.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
        .collect();
    ensure(
        shape == strip_comments(&read_fixture("bibliography_tables.txt")),
        || format!("tables {shape:?}"),
    )?;
    let detail = round_trips(&schema)?;
    Ok(format!("{} tables; {detail}", r.len()))
}

fn cli_chain() -> Check {
    let dir = surf_dir();
    let ingested = ingest_surf(dir.path())?;
    let d = dir.path();
    webhouse(d, &["validate", "surf.xml"])?;
    webhouse(d, &["schema", "--out", "schema.sql"])?;
    webhouse(
        d,
        &[
            "load",
            "surf.xml",
            "--db",
            "ods.json",
            "--sql-out",
            "ods.sql",
        ],
    )?;
    webhouse(
        d,
        &[
            "export",
            "--db",
            "ods.json",
            "--id",
            "1",
            "--out",
            "export.xml",
        ],
    )?;
    let exported = fs::read_to_string(d.join("export.xml")).map_err(|e| e.to_string())?;
    ensure(exported == ingested, || {
        "export differs from ingest output".into()
    })?;
    Ok("ingest, validate, schema, load, export all exit 0; export equals ingest".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("DTD fidelity", Some(FAST), dtd_fidelity),
        ("mapping fidelity", None, mapping_fidelity),
        (
            "sample image reproduction",
            Some(FAST),
            sample_image_reproduction,
        ),
        ("round-trip property", Some(ROUND_TRIP_BUDGET), || {
            round_trips(&bundled())
        }),
        ("validation soundness", None, validation_soundness),
        ("extraction oracles", None, extraction_oracles),
        ("genericity", Some(ROUND_TRIP_BUDGET), genericity),
        ("end-to-end CLI", None, cli_chain),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        match timed(budget, check) {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {}/8 passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
