use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{RowSet, Value};
use crate::mapper::{emit_ddl, RelationalSchema};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("integrity violation: {0}")]
    IntegrityViolation(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access store `{path}`: {source}")]
    Io { path: String, source: io::Error },
    #[error("store `{path}` is corrupt: {source}")]
    Format {
        path: String,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredTable {
    pub columns: Vec<String>,
    /// Foreign key column and the table it references.
    pub parent: Option<(String, String)>,
    /// At most one row per parent row.
    pub single: bool,
    /// Full rows in column order, ascending by id.
    pub rows: Vec<Vec<Value>>,
}

impl StoredTable {
    fn max_id(&self) -> i64 {
        self.rows
            .iter()
            .filter_map(|r| r[0].as_integer())
            .max()
            .unwrap_or(0)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// In-process relational store created from emitted DDL. Persists as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdsStore {
    ddl: String,
    tables: IndexMap<String, StoredTable>,
}

impl OdsStore {
    pub fn new(rschema: &RelationalSchema) -> Self {
        let tables = rschema
            .tables
            .iter()
            .map(|t| {
                let stored = StoredTable {
                    columns: t.columns.iter().map(|c| c.name.clone()).collect(),
                    parent: t
                        .parent
                        .as_ref()
                        .map(|p| (p.column.clone(), p.table.clone())),
                    single: t.single,
                    rows: Vec::new(),
                };
                (t.name.clone(), stored)
            })
            .collect();
        OdsStore {
            ddl: emit_ddl(rschema),
            tables,
        }
    }

    pub fn ddl(&self) -> &str {
        &self.ddl
    }

    /// True when the store was created for this relational schema.
    pub fn fits(&self, rschema: &RelationalSchema) -> bool {
        self.ddl == emit_ddl(rschema)
    }

    pub fn table(&self, name: &str) -> Option<&StoredTable> {
        self.tables.get(name)
    }

    pub fn tables(&self) -> impl Iterator<Item = (&str, &StoredTable)> {
        self.tables.iter().map(|(n, t)| (n.as_str(), t))
    }

    /// Rows of a table as column maps, in id order.
    pub fn select(&self, name: &str) -> Option<Vec<IndexMap<String, Value>>> {
        let t = self.tables.get(name)?;
        Some(
            t.rows
                .iter()
                .map(|r| t.columns.iter().cloned().zip(r.iter().cloned()).collect())
                .collect(),
        )
    }

    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
            path: shown.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| StoreError::Format {
            path: shown,
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let shown = path.display().to_string();
        let text = serde_json::to_string_pretty(self).expect("store values always serialize");
        fs::write(path, text + "\n").map_err(|source| StoreError::Io {
            path: shown,
            source,
        })
    }

    /// DDL followed by one `INSERT` per row with explicit ids.
    ///
    /// Text uses standard quote doubling. Newlines inside text stay literal
    /// within the quotes, so such a statement spans several lines.
    pub fn to_sql_script(&self) -> String {
        let mut out = self.ddl.clone();
        for (name, t) in &self.tables {
            let cols = t.columns.join(", ");
            for row in &t.rows {
                let vals: Vec<String> = row
                    .iter()
                    .map(|v| match v {
                        Value::Null => "NULL".to_string(),
                        Value::Integer(i) => i.to_string(),
                        Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
                    })
                    .collect();
                out.push_str(&format!(
                    "INSERT INTO {name} ({cols}) VALUES ({});\n",
                    vals.join(", ")
                ));
            }
        }
        out
    }
}

/// Rows inserted by one load, per table in schema order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub counts: IndexMap<String, usize>,
}

impl LoadReport {
    pub fn get(&self, table: &str) -> usize {
        self.counts.get(table).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, n) in &self.counts {
            writeln!(f, "{t}: {n}")?;
        }
        Ok(())
    }
}

/// Applies every insert or none.
///
/// Ids in the row set are local to it. They are shifted past the current
/// maximum of each table, and parent keys by the parent table's shift.
pub fn load(rows: &RowSet, store: &mut OdsStore) -> Result<LoadReport, LoadError> {
    let offsets: HashMap<&str, i64> = store
        .tables
        .iter()
        .map(|(n, t)| (n.as_str(), t.max_id()))
        .collect();
    let mut ids: HashMap<&str, HashSet<i64>> = HashMap::new();
    let mut parents_used: HashMap<&str, HashSet<i64>> = HashMap::new();
    let mut staged: IndexMap<&str, Vec<Vec<Value>>> = IndexMap::new();

    for insert in &rows.inserts {
        let (name, t) = store
            .tables
            .get_key_value(insert.table.as_str())
            .ok_or_else(|| {
                LoadError::SchemaMismatch(format!("unknown table `{}`", insert.table))
            })?;
        let name = name.as_str();
        if let Some(c) = insert.values.keys().find(|c| t.column_index(c).is_none()) {
            return Err(LoadError::SchemaMismatch(format!(
                "unknown column `{name}.{c}`"
            )));
        }
        let mut row: Vec<Value> = t
            .columns
            .iter()
            .map(|c| insert.values.get(c).cloned().unwrap_or(Value::Null))
            .collect();
        let id = row[0].as_integer().ok_or_else(|| {
            LoadError::IntegrityViolation(format!("row of `{name}` has no integer id"))
        })? + offsets[name];
        let known = ids
            .entry(name)
            .or_insert_with(|| t.rows.iter().filter_map(|r| r[0].as_integer()).collect());
        if !known.insert(id) {
            return Err(LoadError::IntegrityViolation(format!(
                "duplicate id {id} in `{name}`"
            )));
        }
        row[0] = Value::Integer(id);

        if let Some((fk, parent)) = &t.parent {
            let at = t.column_index(fk).expect("parent key is a column");
            let parent_table = store.tables.get(parent).ok_or_else(|| {
                LoadError::SchemaMismatch(format!("missing parent table `{parent}`"))
            })?;
            let fk_value = row[at].as_integer().ok_or_else(|| {
                LoadError::IntegrityViolation(format!("row {id} of `{name}` has no parent key"))
            })? + offsets[parent.as_str()];
            let parent_ids = ids.entry(parent.as_str()).or_insert_with(|| {
                parent_table
                    .rows
                    .iter()
                    .filter_map(|r| r[0].as_integer())
                    .collect()
            });
            if !parent_ids.contains(&fk_value) {
                return Err(LoadError::IntegrityViolation(format!(
                    "row {id} of `{name}` references missing `{parent}` row {fk_value}"
                )));
            }
            if t.single {
                let used = parents_used
                    .entry(name)
                    .or_insert_with(|| t.rows.iter().filter_map(|r| r[at].as_integer()).collect());
                if !used.insert(fk_value) {
                    return Err(LoadError::IntegrityViolation(format!(
                        "`{parent}` row {fk_value} has more than one `{name}` row"
                    )));
                }
            }
            row[at] = Value::Integer(fk_value);
        }
        staged.entry(name).or_default().push(row);
    }

    let mut staged: HashMap<String, Vec<Vec<Value>>> = staged
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let mut report = LoadReport::default();
    let names: Vec<String> = store.tables.keys().cloned().collect();
    for name in names {
        let new_rows = staged.remove(&name).unwrap_or_default();
        report.counts.insert(name.clone(), new_rows.len());
        let t = store
            .tables
            .get_mut(&name)
            .expect("name taken from the store");
        t.rows.extend(new_rows);
        t.rows.sort_by_key(|r| r[0].as_integer());
    }
    Ok(report)
}
