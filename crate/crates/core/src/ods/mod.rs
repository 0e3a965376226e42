//! The operational data store: shredding documents into rows, loading
//! them, and exporting them back as documents.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtd::{match_content, validate, DtdSchema, Match, ValidationReport};
use crate::mapper::{ColumnRole, Particle, RelationalSchema, Table, TableKind};
use crate::xml::Element;

mod export;
mod store;

pub use export::{export, export_tree, ExportError};
pub use store::{load, LoadError, LoadReport, OdsStore, StoreError, StoredTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Integer(i64),
    Text(String),
}

impl Value {
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Value::Integer(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Insert {
    pub table: String,
    pub values: IndexMap<String, Value>,
}

/// Rows in insertion order; a parent row always precedes its children.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RowSet {
    pub inserts: Vec<Insert>,
}

impl RowSet {
    /// Rows per table, in schema order, zero counts included.
    pub fn counts(&self, rschema: &RelationalSchema) -> IndexMap<String, usize> {
        let mut counts: IndexMap<String, usize> =
            rschema.tables.iter().map(|t| (t.name.clone(), 0)).collect();
        for i in &self.inserts {
            *counts.entry(i.table.clone()).or_default() += 1;
        }
        counts
    }

    /// Elements represented: one per element or leaf row, plus one per
    /// non-null leaf column. Group rows and discriminators stand for none.
    pub fn element_count(&self, rschema: &RelationalSchema) -> usize {
        self.inserts
            .iter()
            .map(|i| {
                let Some(t) = rschema.table(&i.table) else {
                    return 0;
                };
                let own = usize::from(t.kind != TableKind::Group);
                let leaves = t
                    .columns
                    .iter()
                    .filter(|c| matches!(c.role, ColumnRole::Leaf(_)))
                    .filter(|c| i.values.get(&c.name).is_some_and(|v| !v.is_null()))
                    .count();
                own + leaves
            })
            .sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShredError {
    #[error("document is not valid:\n{0}")]
    NotValidated(ValidationReport),
    #[error("relational schema does not fit the document type: {0}")]
    SchemaMismatch(String),
}

/// Decomposes a valid document into rows, in document order.
pub fn shred(
    document: &Element,
    schema: &DtdSchema,
    rschema: &RelationalSchema,
) -> Result<RowSet, ShredError> {
    let report = validate(document, schema);
    if !report.is_valid() {
        return Err(ShredError::NotValidated(report));
    }
    let root = rschema
        .root()
        .filter(|t| t.element() == Some(document.name.as_str()))
        .ok_or_else(|| {
            ShredError::SchemaMismatch(format!("no root table for `{}`", document.name))
        })?;
    let mut s = Shredder {
        schema,
        rschema,
        rows: RowSet::default(),
        next_ids: IndexMap::new(),
    };
    s.element(document, root, None, 1)?;
    Ok(s.rows)
}

struct Shredder<'a> {
    schema: &'a DtdSchema,
    rschema: &'a RelationalSchema,
    rows: RowSet,
    next_ids: IndexMap<String, i64>,
}

impl<'a> Shredder<'a> {
    fn table(&self, name: &str) -> Result<&'a Table, ShredError> {
        self.rschema
            .table(name)
            .ok_or_else(|| ShredError::SchemaMismatch(format!("missing table `{name}`")))
    }

    /// Appends a row with every column null except the key, parent key and
    /// position. Returns its index and id.
    fn new_row(&mut self, table: &Table, parent: Option<i64>, pos: i64) -> (usize, i64) {
        let next = self.next_ids.entry(table.name.clone()).or_insert(0);
        *next += 1;
        let id = *next;
        let mut values: IndexMap<String, Value> = table
            .columns
            .iter()
            .map(|c| (c.name.clone(), Value::Null))
            .collect();
        values.insert("id".into(), Value::Integer(id));
        if let (Some(link), Some(p)) = (&table.parent, parent) {
            values.insert(link.column.clone(), Value::Integer(p));
            values.insert("pos".into(), Value::Integer(pos));
        }
        self.rows.inserts.push(Insert {
            table: table.name.clone(),
            values,
        });
        (self.rows.inserts.len() - 1, id)
    }

    fn set(&mut self, row: usize, column: &str, value: String) {
        self.rows.inserts[row]
            .values
            .insert(column.into(), Value::Text(value));
    }

    fn element(
        &mut self,
        el: &Element,
        table: &'a Table,
        parent: Option<i64>,
        pos: i64,
    ) -> Result<(), ShredError> {
        let (row, id) = self.new_row(table, parent, pos);
        if table.content == Particle::Text {
            self.set(row, "value", el.text());
            return Ok(());
        }
        let children: Vec<&Element> = el.elements().collect();
        let names: Vec<&str> = children.iter().map(|c| c.name.as_str()).collect();
        let model = self
            .schema
            .model(&el.name)
            .ok_or_else(|| ShredError::SchemaMismatch(format!("`{}` is not declared", el.name)))?;
        let m = match_content(model, &names)
            .ok_or_else(|| ShredError::NotValidated(validate(el, self.schema)))?;
        self.fill(&table.content, &m, &children, row, id)
    }

    fn fill(
        &mut self,
        p: &'a Particle,
        m: &Match,
        children: &[&Element],
        row: usize,
        id: i64,
    ) -> Result<(), ShredError> {
        let mismatch =
            || ShredError::SchemaMismatch(format!("plan {p:?} does not fit match {m:?}"));
        match (p, m) {
            (Particle::Column { column, .. }, Match::Element(i)) => {
                self.set(row, column, children[*i].text())
            }
            (Particle::Child { table, .. }, Match::Element(i)) => {
                let t = self.table(table)?;
                self.element(children[*i], t, Some(id), 1)?;
            }
            (Particle::Repeated { table, .. }, Match::Repeat(items)) => {
                let t = self.table(table)?;
                for (k, item) in items.iter().enumerate() {
                    let Match::Element(i) = item else {
                        return Err(mismatch());
                    };
                    self.element(children[*i], t, Some(id), k as i64 + 1)?;
                }
            }
            (Particle::Group { table }, Match::Repeat(items)) => {
                let t = self.table(table)?;
                for (k, item) in items.iter().enumerate() {
                    let (g_row, g_id) = self.new_row(t, Some(id), k as i64 + 1);
                    self.fill(&t.content, item, children, g_row, g_id)?;
                }
            }
            (
                Particle::Choice {
                    column,
                    alternatives,
                },
                Match::Choice(i, inner),
            ) => {
                let (label, alt) = alternatives.get(*i).ok_or_else(mismatch)?;
                self.set(row, column, label.clone());
                self.fill(alt, inner, children, row, id)?;
            }
            (Particle::Optional(inner), Match::Repeat(items)) => {
                if let Some(item) = items.first() {
                    self.fill(inner, item, children, row, id)?;
                }
            }
            (Particle::Seq(parts), Match::Sequence(items)) if parts.len() == items.len() => {
                for (part, item) in parts.iter().zip(items) {
                    self.fill(part, item, children, row, id)?;
                }
            }
            // an empty sequence matches whatever empty content produced
            (Particle::Seq(parts), _) if parts.is_empty() => {}
            _ => return Err(mismatch()),
        }
        Ok(())
    }
}
