use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use webhouse::dtd::{parse_dtd, validate, DtdSchema};
use webhouse::extract::{extract_subdocument, IngestOptions};
use webhouse::mapper::{emit_ddl, map_schema, RelationalSchema};
use webhouse::model::make_complex_object;
use webhouse::ods::{export, load, shred, OdsStore};
use webhouse::serialize::{build_tree, Record};
use webhouse::sidecar::SidecarRecord;
use webhouse::xml::{parse_document, write_document, Element};
use webhouse::{MLFD_DTD, MLFD_SYSTEM_ID};

/// Integrates web documents into XML and loads them into a relational store.
#[derive(Parser)]
#[command(name = "webhouse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract metadata from files into one complex-object document.
    Ingest(IngestArgs),
    /// Print the relational schema (DDL) generated from a DTD.
    Schema {
        #[arg(long)]
        dtd: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a document against a DTD.
    Validate {
        doc: PathBuf,
        #[arg(long)]
        dtd: Option<PathBuf>,
    },
    /// Validate, shred and load a document into the store.
    #[command(group(clap::ArgGroup::new("target").required(true).multiple(true).args(["db", "sql_out"])))]
    Load {
        doc: PathBuf,
        #[arg(long)]
        dtd: Option<PathBuf>,
        /// Store file, created when missing.
        #[arg(long)]
        db: Option<PathBuf>,
        /// Write the store as an SQL script.
        #[arg(long)]
        sql_out: Option<PathBuf>,
    },
    /// Rebuild the document of a stored object.
    Export {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        id: i64,
        #[arg(long)]
        dtd: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IngestArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Object name; defaults to the first file's stem.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    source: Option<String>,
    /// YYYY-MM-DD; defaults to today.
    #[arg(long)]
    date: Option<String>,
    #[arg(long = "keyword")]
    keywords: Vec<String>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[arg(long)]
    query: Option<String>,
    /// Keep only the attributes of a relational view.
    #[arg(long)]
    intention_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dtd: Option<PathBuf>,
}

/// Outcome classes and their exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Input(anyhow::Error),
    Invalid(String),
    NotFound(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Invalid(_) => 3,
            Failure::NotFound(_) => 4,
        }
    }
}

type Outcome = Result<(), Failure>;

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Ingest(args) => ingest(args),
        Command::Schema { dtd, out } => schema(dtd, out),
        Command::Validate { doc, dtd } => validate_cmd(&doc, dtd),
        Command::Load {
            doc,
            dtd,
            db,
            sql_out,
        } => load_cmd(&doc, dtd, db, sql_out),
        Command::Export { db, id, dtd, out } => export_cmd(&db, id, dtd, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(report) => eprint!("{report}"),
                Failure::Usage(e) | Failure::Input(e) | Failure::NotFound(e) => {
                    eprintln!("webhouse: error: {e:#}")
                }
            }
            ExitCode::from(f.code())
        }
    }
}

/// The schema from `--dtd`, or the bundled one, with its system id.
fn load_dtd(path: Option<&Path>) -> Result<(DtdSchema, String), Failure> {
    let Some(path) = path else {
        return Ok((
            parse_dtd(MLFD_DTD).map_err(input)?,
            MLFD_SYSTEM_ID.to_string(),
        ));
    };
    let text = fs::read_to_string(path).map_err(|e| {
        let err = anyhow!(e).context(format!("cannot read DTD `{}`", path.display()));
        if path.exists() {
            Failure::Input(err)
        } else {
            Failure::Usage(err)
        }
    })?;
    let schema = parse_dtd(&text)
        .with_context(|| format!("in DTD `{}`", path.display()))
        .map_err(input)?;
    let system_id = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| MLFD_SYSTEM_ID.to_string());
    Ok((schema, system_id))
}

fn relational(schema: &DtdSchema) -> Result<RelationalSchema, Failure> {
    map_schema(schema).map_err(input)
}

fn write_output(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("cannot write `{}`", p.display()))
            .map_err(input),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write output")
            .map_err(input),
    }
}

fn read_document(path: &Path) -> Result<Element, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read `{}`", path.display()))
        .map_err(input)?;
    let doc = parse_document(&text)
        .with_context(|| format!("in `{}`", path.display()))
        .map_err(input)?;
    Ok(doc.root)
}

fn check_valid(root: &Element, schema: &DtdSchema) -> Outcome {
    let report = validate(root, schema);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(report.to_string()))
    }
}

fn ingest(args: IngestArgs) -> Outcome {
    let (schema, system_id) = load_dtd(args.dtd.as_deref())?;
    let mut sidecar = match &args.sidecar {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read sidecar `{}`", p.display()))
                .map_err(input)?;
            SidecarRecord::parse(&text)
                .with_context(|| format!("in sidecar `{}`", p.display()))
                .map_err(input)?
        }
        None => SidecarRecord::new(),
    };
    // flags come after the file so they win where a single value is kept
    for k in &args.keywords {
        sidecar.push("keyword", k);
    }
    if let Some(lang) = &args.language {
        sidecar.push("language", lang);
    }
    if let Some(q) = &args.query {
        sidecar.push("query", q);
    }
    let opts = IngestOptions {
        doc_name: None,
        query: args.query.clone(),
        intention_only: args.intention_only,
        sidecar: sidecar.clone(),
    };

    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = args
            .paths
            .iter()
            .map(|p| {
                s.spawn(|| {
                    extract_subdocument(p, &opts)
                        .with_context(|| format!("cannot ingest `{}`", p.display()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("extraction thread panicked"))
            .collect()
    });
    let subdocuments = results
        .into_iter()
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(input)?;

    let name = match &args.name {
        Some(n) => n.clone(),
        None => args.paths[0]
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let source = args
        .source
        .as_deref()
        .or(sidecar.get("source"))
        .unwrap_or("Local")
        .to_string();
    let date = args.date.as_deref().or(sidecar.get("date"));
    let object = make_complex_object(&name, date, &source, subdocuments).map_err(input)?;
    let tree = build_tree(schema.root(), &Record::from(&object), &schema).map_err(input)?;
    check_valid(&tree, &schema)?;

    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{name}.xml")));
    write_output(Some(&out), &write_document(&tree, &system_id))?;
    eprintln!(
        "wrote {} ({} subdocument(s))",
        out.display(),
        object.subdocuments.len()
    );
    Ok(())
}

fn schema(dtd: Option<PathBuf>, out: Option<PathBuf>) -> Outcome {
    let (schema, _) = load_dtd(dtd.as_deref())?;
    let rschema = relational(&schema)?;
    write_output(out.as_deref(), &emit_ddl(&rschema))
}

fn validate_cmd(doc: &Path, dtd: Option<PathBuf>) -> Outcome {
    let (schema, _) = load_dtd(dtd.as_deref())?;
    let root = read_document(doc)?;
    check_valid(&root, &schema)?;
    println!("valid");
    Ok(())
}

fn load_cmd(
    doc: &Path,
    dtd: Option<PathBuf>,
    db: Option<PathBuf>,
    sql_out: Option<PathBuf>,
) -> Outcome {
    let (schema, _) = load_dtd(dtd.as_deref())?;
    let rschema = relational(&schema)?;
    let root = read_document(doc)?;
    check_valid(&root, &schema)?;
    let rows = shred(&root, &schema, &rschema).map_err(input)?;

    let mut store = match &db {
        Some(p) if p.exists() => {
            let store = OdsStore::open(p).map_err(input)?;
            if !store.fits(&rschema) {
                return Err(input(anyhow!(
                    "store `{}` was created for a different schema",
                    p.display()
                )));
            }
            store
        }
        _ => OdsStore::new(&rschema),
    };
    let report = load(&rows, &mut store).map_err(input)?;
    if let Some(p) = &db {
        store.save(p).map_err(input)?;
    }
    if let Some(p) = &sql_out {
        write_output(Some(p), &store.to_sql_script())?;
    }
    print!("{report}");
    Ok(())
}

fn export_cmd(db: &Path, id: i64, dtd: Option<PathBuf>, out: Option<PathBuf>) -> Outcome {
    let (schema, system_id) = load_dtd(dtd.as_deref())?;
    let rschema = relational(&schema)?;
    let store = OdsStore::open(db).map_err(input)?;
    if !store.fits(&rschema) {
        return Err(input(anyhow!(
            "store `{}` was created for a different schema",
            db.display()
        )));
    }
    let text = export(&store, id, &schema, &rschema, &system_id).map_err(|e| match e {
        webhouse::ods::ExportError::UnknownId(_) => Failure::NotFound(e.into()),
        other => input(other),
    })?;
    write_output(out.as_deref(), &text)
}
