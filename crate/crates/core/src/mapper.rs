//! Compiles a DTD into relational tables that can hold any valid document.
//!
//! The mapping is order-preserving and invertible:
//!
//! * every element with element content gets a table with a surrogate `id`,
//!   and below the root a `<parent>_id` foreign key and a 1-based `pos`;
//! * a leaf occurring once or optionally is a nullable text column on the
//!   owner's table, while a repeated leaf gets a table `(id, fk, pos, value)`;
//! * a choice adds a discriminator column `choice<k>` naming the alternative;
//! * a repeated group of several particles gets a table `<owner>_g<k>`;
//! * a complex child occurring at most once still gets its own table.
//!
//! Besides the tables, each table carries a [`Particle`] plan that mirrors
//! its content model. Shredding and export both follow that plan.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dtd::{ContentModel, DtdSchema, Multiplicity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("`{name}` is produced by both {first} and {second}")]
    NameCollision {
        name: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Affinity {
    Integer,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRole {
    Key,
    /// Foreign key to the named table.
    Parent(String),
    Position,
    /// Text of a leaf element stored on its owner's row.
    Leaf(String),
    /// Text of the leaf element a repeated-leaf row stands for.
    Value,
    /// Label of the alternative chosen in a choice group.
    Discriminator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub affinity: Affinity,
    pub role: ColumnRole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableKind {
    /// One row per instance of an element with element content.
    Element(String),
    /// One row per instance of a leaf element.
    Leaf(String),
    /// One row per iteration of a repeated group.
    Group,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentLink {
    pub column: String,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub kind: TableKind,
    pub columns: Vec<Column>,
    pub parent: Option<ParentLink>,
    /// At most one row per parent row.
    pub single: bool,
    pub content: Particle,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn element(&self) -> Option<&str> {
        match &self.kind {
            TableKind::Element(e) | TableKind::Leaf(e) => Some(e),
            TableKind::Group => None,
        }
    }
}

/// How a table's row stores the content model of what it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Particle {
    /// The row's own `value` column.
    Text,
    Column {
        element: String,
        column: String,
    },
    Child {
        element: String,
        table: String,
    },
    Repeated {
        element: String,
        table: String,
    },
    Group {
        table: String,
    },
    Choice {
        column: String,
        alternatives: Vec<(String, Particle)>,
    },
    Optional(Box<Particle>),
    Seq(Vec<Particle>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationalSchema {
    /// Parents precede children.
    pub tables: Vec<Table>,
}

impl RelationalSchema {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn root(&self) -> Option<&Table> {
        self.tables.first()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

pub fn table_name(element: &str) -> String {
    element.to_lowercase()
}

pub fn map_schema(schema: &DtdSchema) -> Result<RelationalSchema, MapError> {
    let mut b = Builder {
        schema,
        tables: Vec::new(),
        tables_seen: HashMap::new(),
        columns_seen: HashMap::new(),
    };
    let root = schema.root();
    if schema.is_leaf(root) {
        let t = b.add_table(
            table_name(root),
            TableKind::Leaf(root.into()),
            None,
            format!("root element `{root}`"),
        )?;
        b.add_column(
            t,
            "value",
            Affinity::Text,
            ColumnRole::Value,
            format!("text of `{root}`"),
        )?;
        b.tables[t].content = Particle::Text;
    } else {
        b.element_table(root, None, false, format!("root element `{root}`"))?;
    }
    Ok(RelationalSchema { tables: b.tables })
}

struct Builder<'s> {
    schema: &'s DtdSchema,
    tables: Vec<Table>,
    tables_seen: HashMap<String, String>,
    columns_seen: HashMap<(usize, String), String>,
}

/// Per-table counters for discriminator and group names.
struct Owner {
    table: usize,
    element: String,
    choices: usize,
    groups: usize,
}

impl Builder<'_> {
    fn add_table(
        &mut self,
        name: String,
        kind: TableKind,
        parent: Option<usize>,
        origin: String,
    ) -> Result<usize, MapError> {
        if let Some(first) = self.tables_seen.get(&name) {
            return Err(MapError::NameCollision {
                name,
                first: first.clone(),
                second: origin,
            });
        }
        self.tables_seen.insert(name.clone(), origin);
        let idx = self.tables.len();
        self.tables.push(Table {
            name: name.clone(),
            kind,
            columns: Vec::new(),
            parent: None,
            single: false,
            content: Particle::Seq(Vec::new()),
        });
        self.add_column(
            idx,
            "id",
            Affinity::Integer,
            ColumnRole::Key,
            "the surrogate key".into(),
        )?;
        if let Some(p) = parent {
            let parent_table = self.tables[p].name.clone();
            let fk = format!("{parent_table}_id");
            self.add_column(
                idx,
                &fk,
                Affinity::Integer,
                ColumnRole::Parent(parent_table.clone()),
                "the parent key".into(),
            )?;
            self.add_column(
                idx,
                "pos",
                Affinity::Integer,
                ColumnRole::Position,
                "the sibling position".into(),
            )?;
            self.tables[idx].parent = Some(ParentLink {
                column: fk,
                table: parent_table,
            });
        }
        Ok(idx)
    }

    fn add_column(
        &mut self,
        table: usize,
        name: &str,
        affinity: Affinity,
        role: ColumnRole,
        origin: String,
    ) -> Result<(), MapError> {
        let key = (table, name.to_string());
        if let Some(first) = self.columns_seen.get(&key) {
            return Err(MapError::NameCollision {
                name: format!("{}.{name}", self.tables[table].name),
                first: first.clone(),
                second: origin,
            });
        }
        self.columns_seen.insert(key, origin);
        self.tables[table].columns.push(Column {
            name: name.into(),
            affinity,
            role,
        });
        Ok(())
    }

    fn element_table(
        &mut self,
        element: &str,
        parent: Option<usize>,
        single: bool,
        origin: String,
    ) -> Result<String, MapError> {
        let name = table_name(element);
        let idx = self.add_table(
            name.clone(),
            TableKind::Element(element.into()),
            parent,
            origin,
        )?;
        self.tables[idx].single = single;
        let model = self
            .schema
            .model(element)
            .expect("schema references are checked on construction");
        let mut owner = Owner {
            table: idx,
            element: element.into(),
            choices: 0,
            groups: 0,
        };
        self.tables[idx].content = self.plan(model, &mut owner)?;
        Ok(name)
    }

    fn plan(&mut self, model: &ContentModel, owner: &mut Owner) -> Result<Particle, MapError> {
        let within = format!("the content of `{}`", owner.element);
        Ok(match model {
            // only a leaf root has a PCDATA model of its own
            ContentModel::PcData => Particle::Seq(Vec::new()),
            ContentModel::Element(e) => self.single_element(e, owner)?,
            ContentModel::Sequence(items) => Particle::Seq(
                items
                    .iter()
                    .map(|i| self.plan(i, owner))
                    .collect::<Result<_, _>>()?,
            ),
            ContentModel::Choice(alts) => {
                owner.choices += 1;
                let column = format!("choice{}", owner.choices);
                let origin = format!("choice group {} in {within}", owner.choices);
                self.add_column(
                    owner.table,
                    &column,
                    Affinity::Text,
                    ColumnRole::Discriminator,
                    origin.clone(),
                )?;
                let mut alternatives: Vec<(String, Particle)> = Vec::new();
                for (i, alt) in alts.iter().enumerate() {
                    let label = match alt {
                        ContentModel::Element(e) => e.clone(),
                        ContentModel::Repeat(inner, _) => match &**inner {
                            ContentModel::Element(e) => e.clone(),
                            _ => format!("alt{}", i + 1),
                        },
                        _ => format!("alt{}", i + 1),
                    };
                    if alternatives.iter().any(|(l, _)| *l == label) {
                        return Err(MapError::NameCollision {
                            name: label,
                            first: format!("an earlier alternative of {origin}"),
                            second: format!("alternative {} of {origin}", i + 1),
                        });
                    }
                    let p = self.plan(alt, owner)?;
                    alternatives.push((label, p));
                }
                Particle::Choice {
                    column,
                    alternatives,
                }
            }
            ContentModel::Repeat(inner, Multiplicity::Optional) => match &**inner {
                ContentModel::Element(e) => {
                    Particle::Optional(Box::new(self.single_element(e, owner)?))
                }
                other => Particle::Optional(Box::new(self.plan(other, owner)?)),
            },
            ContentModel::Repeat(inner, _) => match &**inner {
                ContentModel::Element(e) => {
                    let origin = format!("repeated `{e}` in {within}");
                    let table = if self.schema.is_leaf(e) {
                        let t = self.add_table(
                            table_name(e),
                            TableKind::Leaf(e.clone()),
                            Some(owner.table),
                            origin,
                        )?;
                        self.add_column(
                            t,
                            "value",
                            Affinity::Text,
                            ColumnRole::Value,
                            format!("text of `{e}`"),
                        )?;
                        self.tables[t].content = Particle::Text;
                        self.tables[t].name.clone()
                    } else {
                        self.element_table(e, Some(owner.table), false, origin)?
                    };
                    Particle::Repeated {
                        element: e.clone(),
                        table,
                    }
                }
                other => {
                    owner.groups += 1;
                    let name = format!("{}_g{}", self.tables[owner.table].name, owner.groups);
                    let origin = format!("repeated group {} in {within}", owner.groups);
                    let t =
                        self.add_table(name.clone(), TableKind::Group, Some(owner.table), origin)?;
                    let mut inner_owner = Owner {
                        table: t,
                        element: owner.element.clone(),
                        choices: 0,
                        groups: 0,
                    };
                    self.tables[t].content = self.plan(other, &mut inner_owner)?;
                    Particle::Group { table: name }
                }
            },
        })
    }

    /// An element occurring once or optionally.
    fn single_element(&mut self, e: &str, owner: &Owner) -> Result<Particle, MapError> {
        let origin = format!("`{e}` in the content of `{}`", owner.element);
        if self.schema.is_leaf(e) {
            let column = table_name(e);
            self.add_column(
                owner.table,
                &column,
                Affinity::Text,
                ColumnRole::Leaf(e.into()),
                origin,
            )?;
            Ok(Particle::Column {
                element: e.into(),
                column,
            })
        } else {
            let table = self.element_table(e, Some(owner.table), true, origin)?;
            Ok(Particle::Child {
                element: e.into(),
                table,
            })
        }
    }
}

/// `CREATE TABLE` statements, one per line, parents first.
pub fn emit_ddl(rschema: &RelationalSchema) -> String {
    let mut out = String::new();
    for t in &rschema.tables {
        let cols: Vec<String> = t
            .columns
            .iter()
            .map(|c| match &c.role {
                ColumnRole::Key => format!("{} INTEGER PRIMARY KEY", c.name),
                ColumnRole::Parent(p) => format!("{} INTEGER REFERENCES {p}(id)", c.name),
                _ => {
                    let ty = match c.affinity {
                        Affinity::Integer => "INTEGER",
                        Affinity::Text => "TEXT",
                    };
                    format!("{} {ty}", c.name)
                }
            })
            .collect();
        let _ = writeln!(out, "CREATE TABLE {} ({});", t.name, cols.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtd::parse_dtd;
    use crate::MLFD_DTD;

    fn map(dtd: &str) -> Result<RelationalSchema, MapError> {
        map_schema(&parse_dtd(dtd).unwrap())
    }

    fn shape(r: &RelationalSchema) -> Vec<String> {
        r.tables
            .iter()
            .map(|t| {
                let cols: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
                format!("{}: {}", t.name, cols.join(", "))
            })
            .collect()
    }

    fn fixture(text: &str) -> Vec<String> {
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .map(String::from)
            .collect()
    }

    #[test]
    fn bundled_schema_tables() {
        let r = map(MLFD_DTD).unwrap();
        assert_eq!(
            shape(&r),
            fixture(include_str!("../tests/fixtures/mlfd_tables.txt"))
        );
        assert_eq!(emit_ddl(&r), include_str!("../tests/fixtures/mlfd.sql"));
        assert_eq!(emit_ddl(&r), emit_ddl(&map(MLFD_DTD).unwrap()));
    }

    #[test]
    fn bibliography_tables() {
        let r = map(include_str!("../tests/fixtures/bibliography.dtd")).unwrap();
        assert_eq!(
            shape(&r),
            fixture(include_str!("../tests/fixtures/bibliography_tables.txt"))
        );
    }

    #[test]
    fn single_leaf_child() {
        let r = map("<!ELEMENT R (X)> <!ELEMENT X (#PCDATA)>").unwrap();
        assert_eq!(shape(&r), ["r: id, x"]);
        assert_eq!(
            emit_ddl(&r),
            "CREATE TABLE r (id INTEGER PRIMARY KEY, x TEXT);\n"
        );
    }

    #[test]
    fn keyword_ddl_line() {
        let ddl = emit_ddl(&map(MLFD_DTD).unwrap());
        assert!(ddl.lines().any(|l| l
            == "CREATE TABLE keyword (id INTEGER PRIMARY KEY, subdocument_id INTEGER REFERENCES subdocument(id), pos INTEGER, value TEXT);"));
        assert!(ddl.starts_with("CREATE TABLE complex_object "));
    }

    #[test]
    fn empty_schema_no_ddl() {
        assert_eq!(emit_ddl(&RelationalSchema::default()), "");
    }

    #[test]
    fn leaf_root() {
        let r = map("<!ELEMENT NOTE (#PCDATA)>").unwrap();
        assert_eq!(shape(&r), ["note: id, value"]);
        assert_eq!(r.tables[0].content, Particle::Text);
    }

    #[test]
    fn tuple_group_plan() {
        let r = map(MLFD_DTD).unwrap();
        let tuple = r.table("tuple").unwrap();
        assert_eq!(
            tuple.content,
            Particle::Group {
                table: "tuple_g1".into()
            }
        );
        assert!(!tuple.single);
        assert!(r.table("image").unwrap().single);
        let g = r.table("tuple_g1").unwrap();
        assert_eq!(g.kind, TableKind::Group);
        assert_eq!(
            g.parent,
            Some(ParentLink {
                column: "tuple_id".into(),
                table: "tuple".into()
            })
        );
    }

    #[test]
    fn choice_labels() {
        let r = map("<!ELEMENT R ((A | B*), ((A2, B2) | C)?)>
             <!ELEMENT A (#PCDATA)> <!ELEMENT B (#PCDATA)> <!ELEMENT A2 (#PCDATA)>
             <!ELEMENT B2 (#PCDATA)> <!ELEMENT C (#PCDATA)>")
        .unwrap();
        let Particle::Seq(parts) = &r.tables[0].content else {
            panic!()
        };
        let Particle::Choice {
            column,
            alternatives,
        } = &parts[0]
        else {
            panic!()
        };
        assert_eq!(column, "choice1");
        let labels: Vec<_> = alternatives.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["A", "B"]);
        let Particle::Optional(second) = &parts[1] else {
            panic!()
        };
        let Particle::Choice {
            column,
            alternatives,
        } = &**second
        else {
            panic!()
        };
        assert_eq!(column, "choice2");
        assert_eq!(alternatives[0].0, "alt1");
        assert_eq!(alternatives[1].0, "C");
    }

    #[test]
    fn nested_groups_are_numbered_per_owner() {
        let r = map("<!ELEMENT R ((A, (B, C)*)*, (D, E)+)>
             <!ELEMENT A (#PCDATA)> <!ELEMENT B (#PCDATA)> <!ELEMENT C (#PCDATA)>
             <!ELEMENT D (#PCDATA)> <!ELEMENT E (#PCDATA)>")
        .unwrap();
        assert_eq!(
            shape(&r),
            [
                "r: id",
                "r_g1: id, r_id, pos, a",
                "r_g1_g1: id, r_g1_id, pos, b, c",
                "r_g2: id, r_id, pos, d, e"
            ]
        );
    }

    #[test]
    fn collisions() {
        let shared = map(
            "<!ELEMENT R (P, Q)> <!ELEMENT P (S)> <!ELEMENT Q (S)> <!ELEMENT S (X)> <!ELEMENT X (#PCDATA)>",
        );
        match shared {
            Err(MapError::NameCollision {
                name,
                first,
                second,
            }) => {
                assert_eq!(name, "s");
                assert!(
                    first.contains("`P`") && second.contains("`Q`"),
                    "{first} / {second}"
                );
            }
            other => panic!("{other:?}"),
        }
        let twice = map("<!ELEMENT R (X, X)> <!ELEMENT X (#PCDATA)>");
        assert!(matches!(twice, Err(MapError::NameCollision { name, .. }) if name == "r.x"));
        let reserved = map("<!ELEMENT R (ID)> <!ELEMENT ID (#PCDATA)>");
        assert!(matches!(reserved, Err(MapError::NameCollision { name, .. }) if name == "r.id"));
        let recursive = map("<!ELEMENT R (N)> <!ELEMENT N (V, N*)> <!ELEMENT V (#PCDATA)>");
        assert!(matches!(recursive, Err(MapError::NameCollision { name, .. }) if name == "n"));
        let discriminator = map("<!ELEMENT R ((A | B), CHOICE1)> <!ELEMENT A (#PCDATA)> <!ELEMENT B (#PCDATA)> <!ELEMENT CHOICE1 (#PCDATA)>");
        assert!(
            matches!(discriminator, Err(MapError::NameCollision { name, .. }) if name == "r.choice1")
        );
        let labels = map("<!ELEMENT R (A | A*)> <!ELEMENT A (#PCDATA)>");
        assert!(matches!(labels, Err(MapError::NameCollision { .. })));
    }
}
