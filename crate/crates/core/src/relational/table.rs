use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::schema::TableSchema;
use super::value::{Row, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("row for `{table}` has {got} values, schema has {expected} fields")]
    Arity { table: String, expected: usize, got: usize },
    #[error("row rejected by `{table}`: {reason}")]
    Mismatch { table: String, reason: String },
    #[error("duplicate primary key {key} in `{table}`")]
    DuplicateKey { table: String, key: String },
    #[error("null primary-key field `{field}` in `{table}`")]
    NullKey { table: String, field: String },
    #[error("unknown field `{field}` in `{table}`")]
    UnknownField { table: String, field: String },
    #[error("row position {pos} out of range for `{table}`")]
    BadPosition { table: String, pos: usize },
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("table `{0}` already exists")]
    DuplicateTable(String),
}

/// `(record_length, record_count, total_bytes)` for one table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableStats {
    pub record_length: u64,
    pub record_count: u64,
    pub total_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct Table {
    schema: TableSchema,
    rows: Vec<Row>,
    keys: Option<HashSet<Row>>,
    record_count: u64,
    total_bytes: u64,
}

impl Table {
    pub fn new(schema: TableSchema) -> Self {
        let keys = (schema.unique_key && !schema.primary_key.is_empty()).then(HashSet::new);
        Self {
            schema,
            rows: Vec::new(),
            keys,
            record_count: 0,
            total_bytes: 0,
        }
    }

    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn stats(&self) -> TableStats {
        TableStats {
            record_length: self.schema.record_length as u64,
            record_count: self.record_count,
            total_bytes: self.total_bytes,
        }
    }

    fn validate(&self, row: &Row) -> Result<(), TableError> {
        if row.len() != self.schema.fields.len() {
            return Err(TableError::Arity {
                table: self.schema.name.clone(),
                expected: self.schema.fields.len(),
                got: row.len(),
            });
        }
        for (spec, value) in self.schema.fields.iter().zip(row) {
            spec.check(value).map_err(|reason| TableError::Mismatch {
                table: self.schema.name.clone(),
                reason,
            })?;
        }
        Ok(())
    }

    fn key_of(&self, row: &Row) -> Row {
        self.schema.key_indices().into_iter().map(|i| row[i].clone()).collect()
    }

    /// Appends a row and returns its position.
    pub fn insert(&mut self, row: Row) -> Result<usize, TableError> {
        self.validate(&row)?;
        for i in self.schema.key_indices() {
            if row[i].is_null() {
                return Err(TableError::NullKey {
                    table: self.schema.name.clone(),
                    field: self.schema.fields[i].name.clone(),
                });
            }
        }
        let key = self.keys.is_some().then(|| self.key_of(&row));
        if let (Some(key), Some(keys)) = (key, self.keys.as_mut()) {
            if keys.contains(&key) {
                let rendered: Vec<String> = key.iter().map(ToString::to_string).collect();
                return Err(TableError::DuplicateKey {
                    table: self.schema.name.clone(),
                    key: rendered.join("|"),
                });
            }
            keys.insert(key);
        }
        self.rows.push(row);
        self.record_count += 1;
        self.total_bytes += self.schema.record_length as u64;
        Ok(self.rows.len() - 1)
    }

    /// Overwrites one non-key field in place.
    pub fn update(&mut self, pos: usize, field: &str, value: Value) -> Result<(), TableError> {
        let idx = self.schema.field_index(field).ok_or_else(|| TableError::UnknownField {
            table: self.schema.name.clone(),
            field: field.to_string(),
        })?;
        if self.keys.is_some() && self.schema.primary_key.iter().any(|k| k == field) {
            return Err(TableError::Mismatch {
                table: self.schema.name.clone(),
                reason: format!("cannot update primary-key field `{field}`"),
            });
        }
        self.schema.fields[idx]
            .check(&value)
            .map_err(|reason| TableError::Mismatch {
                table: self.schema.name.clone(),
                reason,
            })?;
        let row = self.rows.get_mut(pos).ok_or_else(|| TableError::BadPosition {
            table: self.schema.name.clone(),
            pos,
        })?;
        row[idx] = value;
        Ok(())
    }

    /// Removes every row matching `pred`; returns how many were removed.
    pub fn delete_where(&mut self, mut pred: impl FnMut(&Row) -> bool) -> usize {
        let before = self.rows.len();
        let key_idx = self.schema.key_indices();
        let keys = &mut self.keys;
        self.rows.retain(|row| {
            let drop = pred(row);
            if drop {
                if let Some(keys) = keys.as_mut() {
                    let key: Row = key_idx.iter().map(|&i| row[i].clone()).collect();
                    keys.remove(&key);
                }
            }
            !drop
        });
        let removed = before - self.rows.len();
        self.record_count -= removed as u64;
        self.total_bytes -= (removed * self.schema.record_length) as u64;
        removed
    }

    /// Reorders rows by primary key (stable for equal keys).
    pub fn sort_by_key(&mut self) {
        let idx = self.schema.key_indices();
        self.rows.sort_by(|a, b| {
            idx.iter()
                .map(|&i| a[i].cmp(&b[i]))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    pub fn value<'a>(&self, row: &'a Row, field: &str) -> Option<&'a Value> {
        self.schema.field_index(field).map(|i| &row[i])
    }
}

/// `total_bytes = record_length × record_count` for `table`.
pub fn table_stats(table: &Table) -> TableStats {
    table.stats()
}

/// An ordered set of named tables.
#[derive(Debug, Clone, Default)]
pub struct Database {
    tables: Vec<Table>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_schemas(schemas: impl IntoIterator<Item = TableSchema>) -> Self {
        Self {
            tables: schemas.into_iter().map(Table::new).collect(),
        }
    }

    pub fn add_table(&mut self, table: Table) -> Result<(), TableError> {
        if self.get(table.name()).is_some() {
            return Err(TableError::DuplicateTable(table.name().to_string()));
        }
        self.tables.push(table);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name() == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Table> {
        self.tables.iter_mut().find(|t| t.name() == name)
    }

    pub fn table(&self, name: &str) -> Result<&Table, TableError> {
        self.get(name).ok_or_else(|| TableError::UnknownTable(name.to_string()))
    }

    pub fn table_mut(&mut self, name: &str) -> Result<&mut Table, TableError> {
        self.get_mut(name)
            .ok_or_else(|| TableError::UnknownTable(name.to_string()))
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn insert(&mut self, table: &str, row: Row) -> Result<usize, TableError> {
        self.table_mut(table)?.insert(row)
    }

    pub fn total_records(&self) -> u64 {
        self.tables.iter().map(|t| t.stats().record_count).sum()
    }
}
