use std::collections::HashMap;

use thiserror::Error;

use super::{OdsStore, StoredTable, Value};
use crate::dtd::DtdSchema;
use crate::mapper::{Particle, RelationalSchema, Table};
use crate::xml::{write_document, Element};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExportError {
    #[error("no object with id {0}")]
    UnknownId(i64),
    #[error("store does not fit the relational schema: {0}")]
    SchemaMismatch(String),
    #[error("stored data cannot be read back: {0}")]
    Corrupt(String),
}

/// Rebuilds the document tree of the root row with the given id.
pub fn export_tree(
    store: &OdsStore,
    id: i64,
    schema: &DtdSchema,
    rschema: &RelationalSchema,
) -> Result<Element, ExportError> {
    let root = rschema
        .root()
        .ok_or_else(|| ExportError::SchemaMismatch("relational schema has no tables".into()))?;
    if root.element() != Some(schema.root()) {
        return Err(ExportError::SchemaMismatch(format!(
            "root table `{}` is not for `{}`",
            root.name,
            schema.root()
        )));
    }
    let mut r = Reader {
        store,
        rschema,
        children: HashMap::new(),
    };
    let stored = r.stored(&root.name)?;
    let row = stored
        .rows
        .iter()
        .find(|row| row[0].as_integer() == Some(id))
        .ok_or(ExportError::UnknownId(id))?;
    r.element(root, stored, row)
}

/// Canonical document text for the root row with the given id.
pub fn export(
    store: &OdsStore,
    id: i64,
    schema: &DtdSchema,
    rschema: &RelationalSchema,
    system_id: &str,
) -> Result<String, ExportError> {
    Ok(write_document(
        &export_tree(store, id, schema, rschema)?,
        system_id,
    ))
}

struct Reader<'a> {
    store: &'a OdsStore,
    rschema: &'a RelationalSchema,
    /// Per table: parent id to row indexes, ordered by position.
    children: HashMap<&'a str, HashMap<i64, Vec<usize>>>,
}

impl<'a> Reader<'a> {
    fn stored(&self, name: &str) -> Result<&'a StoredTable, ExportError> {
        self.store
            .table(name)
            .ok_or_else(|| ExportError::SchemaMismatch(format!("store has no table `{name}`")))
    }

    fn table(&self, name: &str) -> Result<&'a Table, ExportError> {
        self.rschema
            .table(name)
            .ok_or_else(|| ExportError::SchemaMismatch(format!("schema has no table `{name}`")))
    }

    fn rows_under(
        &mut self,
        name: &'a str,
        parent: i64,
    ) -> Result<(&'a StoredTable, Vec<&'a [Value]>), ExportError> {
        let stored = self.stored(name)?;
        if !self.children.contains_key(name) {
            let (fk, _) = stored.parent.as_ref().ok_or_else(|| {
                ExportError::SchemaMismatch(format!("`{name}` has no parent key"))
            })?;
            let fk_at = col(stored, fk)?;
            let pos_at = col(stored, "pos")?;
            let mut index: HashMap<i64, Vec<usize>> = HashMap::new();
            for (i, row) in stored.rows.iter().enumerate() {
                if let Some(p) = row[fk_at].as_integer() {
                    index.entry(p).or_default().push(i);
                }
            }
            for rows in index.values_mut() {
                rows.sort_by_key(|&i| stored.rows[i][pos_at].as_integer());
            }
            self.children.insert(name, index);
        }
        let rows = self.children[name]
            .get(&parent)
            .map(|ix| ix.iter().map(|&i| stored.rows[i].as_slice()).collect())
            .unwrap_or_default();
        Ok((stored, rows))
    }

    fn element(
        &mut self,
        table: &'a Table,
        stored: &'a StoredTable,
        row: &'a [Value],
    ) -> Result<Element, ExportError> {
        let name = table.element().ok_or_else(|| {
            ExportError::SchemaMismatch(format!("`{}` does not stand for an element", table.name))
        })?;
        if table.content == Particle::Text {
            let text = row[col(stored, "value")?].as_text().unwrap_or_default();
            return Ok(Element::leaf(name, text));
        }
        let mut el = Element::new(name);
        self.emit(&table.content, stored, row, &mut el)?;
        Ok(el)
    }

    fn emit(
        &mut self,
        p: &'a Particle,
        stored: &'a StoredTable,
        row: &'a [Value],
        out: &mut Element,
    ) -> Result<(), ExportError> {
        let id = row[0]
            .as_integer()
            .ok_or_else(|| ExportError::Corrupt("row without integer id".into()))?;
        match p {
            Particle::Text => {}
            Particle::Column { element, column } => {
                // null means the element was absent
                if let Value::Text(t) = &row[col(stored, column)?] {
                    out.push(Element::leaf(element.as_str(), t.as_str()));
                }
            }
            Particle::Child { table, .. } | Particle::Repeated { table, .. } => {
                let t = self.table(table)?;
                let (child_stored, rows) = self.rows_under(&t.name, id)?;
                for r in rows {
                    out.push(self.element(t, child_stored, r)?);
                }
            }
            Particle::Group { table } => {
                let t = self.table(table)?;
                let (group_stored, rows) = self.rows_under(&t.name, id)?;
                for r in rows {
                    self.emit(&t.content, group_stored, r, out)?;
                }
            }
            Particle::Choice {
                column,
                alternatives,
            } => match &row[col(stored, column)?] {
                Value::Null => {}
                Value::Text(label) => {
                    let (_, alt) =
                        alternatives
                            .iter()
                            .find(|(l, _)| l == label)
                            .ok_or_else(|| {
                                ExportError::Corrupt(format!(
                                    "`{column}` holds unknown alternative `{label}`"
                                ))
                            })?;
                    self.emit(alt, stored, row, out)?;
                }
                Value::Integer(i) => {
                    return Err(ExportError::Corrupt(format!(
                        "`{column}` holds a number: {i}"
                    )))
                }
            },
            Particle::Optional(inner) => self.emit(inner, stored, row, out)?,
            Particle::Seq(parts) => {
                for part in parts {
                    self.emit(part, stored, row, out)?;
                }
            }
        }
        Ok(())
    }
}

fn col(stored: &StoredTable, name: &str) -> Result<usize, ExportError> {
    stored
        .column_index(name)
        .ok_or_else(|| ExportError::SchemaMismatch(format!("missing column `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{sample_image, VIEW_DOC};
    use super::super::{load, shred};
    use super::*;
    use crate::xml::parse_document;

    fn round_trip(root: &Element) -> String {
        let (schema, rschema, _) = sample_image();
        let mut store = OdsStore::new(&rschema);
        load(&shred(root, &schema, &rschema).unwrap(), &mut store).unwrap();
        export(&store, 1, &schema, &rschema, "mlfd.dtd").unwrap()
    }

    #[test]
    fn sample_image_round_trip() {
        let (_, _, root) = sample_image();
        assert_eq!(
            round_trip(&root),
            include_str!("../../tests/fixtures/sample_image.xml")
        );
    }

    #[test]
    fn view_round_trip_keeps_empty_value() {
        let root = parse_document(VIEW_DOC).unwrap().root;
        let out = round_trip(&root);
        assert_eq!(out, write_document(&root, "mlfd.dtd"));
        assert!(out.contains("<VALUE/>"));
        assert!(!out.contains("QUERY"));
    }

    #[test]
    fn zero_tuples() {
        let xml = VIEW_DOC.replace(
            "<TUPLE><ATT_NAME_REF>name</ATT_NAME_REF><VALUE>Ann</VALUE><ATT_NAME_REF>age</ATT_NAME_REF><VALUE>40</VALUE></TUPLE>",
            "",
        );
        let xml = xml.replace("<TUPLE><ATT_NAME_REF>name</ATT_NAME_REF><VALUE>Bob</VALUE><ATT_NAME_REF>age</ATT_NAME_REF><VALUE/></TUPLE>", "");
        let root = parse_document(&xml).unwrap().root;
        let out = round_trip(&root);
        assert!(!out.contains("TUPLE"));
        assert_eq!(out, write_document(&root, "mlfd.dtd"));
    }

    #[test]
    fn unknown_id() {
        let (schema, rschema, _) = sample_image();
        let store = OdsStore::new(&rschema);
        assert_eq!(
            export(&store, 999, &schema, &rschema, "mlfd.dtd"),
            Err(ExportError::UnknownId(999))
        );
    }

    #[test]
    fn second_object_exports_alone() {
        let (schema, rschema, fig) = sample_image();
        let view = parse_document(VIEW_DOC).unwrap().root;
        let mut store = OdsStore::new(&rschema);
        load(&shred(&fig, &schema, &rschema).unwrap(), &mut store).unwrap();
        load(&shred(&view, &schema, &rschema).unwrap(), &mut store).unwrap();
        assert_eq!(
            export(&store, 2, &schema, &rschema, "x.dtd").unwrap(),
            write_document(&view, "x.dtd")
        );
        assert_eq!(export_tree(&store, 1, &schema, &rschema).unwrap(), fig);
    }
}
