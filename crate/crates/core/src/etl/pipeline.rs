//! Snapshot-to-warehouse loading and the persisted warehouse.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::merge::{constructive_merge, LoadStats};
use super::source::source_for;
use super::transform::TableTransform;
use super::EtlError;
use crate::campus::Snapshot;
use crate::relational::{io, Database, Row, Table, TableSchema};
use crate::star::{campus_warehouse, WarehouseSchema};

pub const WAREHOUSE_FORMAT: &str = "campus-warehouse/1";
pub const WAREHOUSE_FILE: &str = "warehouse.dw";

/// Snapshot most recently merged into a warehouse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadedSource {
    pub config_hash: String,
    pub taken_on: NaiveDate,
}

impl LoadedSource {
    fn of(snap: &Snapshot) -> Self {
        Self {
            config_hash: snap.config_hash.clone(),
            taken_on: snap.taken_on,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Warehouse {
    schema: WarehouseSchema,
    db: Database,
    last_source: Option<LoadedSource>,
}

impl Warehouse {
    /// Empty tables for every table of `schema`.
    pub fn new(schema: WarehouseSchema) -> Self {
        let db = Database::from_schemas(schema.tables().into_iter().cloned());
        Self {
            schema,
            db,
            last_source: None,
        }
    }

    pub fn campus() -> Self {
        Self::new(campus_warehouse())
    }

    pub fn schema(&self) -> &WarehouseSchema {
        &self.schema
    }

    pub fn db(&self) -> &Database {
        &self.db
    }

    pub fn last_source(&self) -> Option<&LoadedSource> {
        self.last_source.as_ref()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.db.get(name)
    }

    pub fn header(&self) -> String {
        match &self.last_source {
            Some(s) => format!("{WAREHOUSE_FORMAT} source={} taken={}", s.config_hash, s.taken_on),
            None => format!("{WAREHOUSE_FORMAT} source=none"),
        }
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), EtlError> {
        io::write_tables(w, &self.header(), self.db.tables()).map_err(io::FormatError::from)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, EtlError> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    /// Reads a dump written by [`Warehouse::write_to`] against `schema`.
    pub fn read_from<R: BufRead>(reader: R, schema: WarehouseSchema) -> Result<Self, EtlError> {
        let schemas: Vec<TableSchema> = schema.tables().into_iter().cloned().collect();
        let (header, db) = io::read_tables(reader, &schemas)?;
        let bad = || EtlError::Header(header.clone());
        let rest = header.strip_prefix(WAREHOUSE_FORMAT).ok_or_else(bad)?;
        let last_source = match rest.trim() {
            "source=none" => None,
            other => {
                let (src, taken) = other.split_once(' ').ok_or_else(bad)?;
                let config_hash = src.strip_prefix("source=").ok_or_else(bad)?.to_string();
                let taken = taken.strip_prefix("taken=").ok_or_else(bad)?;
                let taken_on = taken.parse().map_err(|_| bad())?;
                Some(LoadedSource { config_hash, taken_on })
            }
        };
        Ok(Self {
            schema,
            db,
            last_source,
        })
    }

    pub fn path_in(dir: &Path) -> PathBuf {
        dir.join(WAREHOUSE_FILE)
    }

    /// Writes the warehouse into `dir`, creating it when absent.
    pub fn save(&self, dir: &Path) -> Result<(), EtlError> {
        fs::create_dir_all(dir).map_err(io::FormatError::from)?;
        let tmp = dir.join(format!("{WAREHOUSE_FILE}.tmp"));
        let file = File::create(&tmp).map_err(io::FormatError::from)?;
        self.write_to(BufWriter::new(file))?;
        fs::rename(&tmp, Self::path_in(dir)).map_err(io::FormatError::from)?;
        Ok(())
    }

    /// Opens the campus warehouse stored in `dir`; a missing file yields an
    /// empty warehouse.
    pub fn open(dir: &Path) -> Result<Self, EtlError> {
        let path = Self::path_in(dir);
        if !path.exists() {
            return Ok(Self::campus());
        }
        let file = File::open(&path).map_err(io::FormatError::from)?;
        Self::read_from(BufReader::new(file), campus_warehouse())
    }
}

fn transforms(schema: &WarehouseSchema) -> Result<Vec<TableTransform>, EtlError> {
    schema
        .tables()
        .into_iter()
        .map(|t| {
            let measures = schema
                .facts
                .iter()
                .find(|s| s.fact.name == t.name)
                .map(|s| s.measures.as_slice())
                .unwrap_or_default();
            TableTransform::new(t, measures)
        })
        .collect()
}

/// Staged rows of every warehouse table, without validity dates.
pub fn extract_transform(db: &Database, schema: &WarehouseSchema) -> Result<BTreeMap<String, Vec<Row>>, EtlError> {
    let mut out = BTreeMap::new();
    for t in transforms(schema)? {
        let records = t.records(&source_for(&t.table, db)?)?;
        out.insert(t.table.clone(), t.stage(&records, None));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtlMode {
    Full,
    Incremental,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableLoad {
    pub table: String,
    pub staged: usize,
    /// Business keys restaged; `None` on a full restage.
    pub changed_keys: Option<usize>,
    pub stats: LoadStats,
    pub rows_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtlReport {
    pub mode: EtlMode,
    pub load_date: NaiveDate,
    pub source: LoadedSource,
    pub tables: Vec<TableLoad>,
}

impl EtlReport {
    pub fn table(&self, name: &str) -> Option<&TableLoad> {
        self.tables.iter().find(|t| t.table == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mode = match self.mode {
            EtlMode::Full => "full restage",
            EtlMode::Incremental => "incremental",
        };
        let mut out = format!(
            "ETL {mode}, load date {}, source {} taken {}\n",
            self.load_date, self.source.config_hash, self.source.taken_on
        );
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>8}",
            "table", "staged", "changed", "inserted", "closed", "unchanged", "rows"
        );
        for t in &self.tables {
            let changed = t.changed_keys.map_or_else(|| "all".to_string(), |n| n.to_string());
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>8}",
                t.table, t.staged, changed, t.stats.inserted, t.stats.closed, t.stats.unchanged, t.rows_after
            );
        }
        out
    }
}

/// Loads `new` into `warehouse` as of `new.taken_on`.
///
/// With `old`, only business keys whose source records differ between the
/// snapshots are restaged; `old` must be the snapshot last loaded. The
/// warehouse is left untouched on error.
pub fn run_etl(old: Option<&Snapshot>, new: &Snapshot, warehouse: &mut Warehouse) -> Result<EtlReport, EtlError> {
    if let Some(old) = old {
        let expected = LoadedSource::of(old);
        if warehouse.last_source.as_ref() != Some(&expected) {
            return Err(EtlError::IncompatibleSnapshots(match &warehouse.last_source {
                Some(s) => format!(
                    "warehouse was last loaded from {} taken {}, not {} taken {}",
                    s.config_hash, s.taken_on, expected.config_hash, expected.taken_on
                ),
                None => "warehouse has never been loaded; run a full load first".into(),
            }));
        }
        if new.taken_on < old.taken_on {
            return Err(EtlError::IncompatibleSnapshots(format!(
                "new snapshot taken {} precedes old snapshot taken {}",
                new.taken_on, old.taken_on
            )));
        }
    }
    let load_date = new.taken_on;
    let mut db = warehouse.db.clone();
    let mut tables = Vec::new();
    for t in transforms(&warehouse.schema)? {
        let records = t.records(&source_for(&t.table, &new.db)?)?;
        let target = db.table_mut(&t.table)?;
        let load = match old {
            None => {
                let staged = t.stage(&records, None);
                let stats = constructive_merge(target, &staged, load_date, None)?;
                TableLoad {
                    table: t.table.clone(),
                    staged: staged.len(),
                    changed_keys: None,
                    stats,
                    rows_after: target.len(),
                }
            }
            Some(old) => {
                let before = t.records(&source_for(&t.table, &old.db)?)?;
                let scope = t.changed_keys(&before, &records);
                let staged = t.stage(&records, Some(&scope));
                let stats = constructive_merge(target, &staged, load_date, Some(&scope))?;
                TableLoad {
                    table: t.table.clone(),
                    staged: staged.len(),
                    changed_keys: Some(scope.len()),
                    stats,
                    rows_after: target.len(),
                }
            }
        };
        tables.push(load);
    }
    warehouse.db = db;
    warehouse.last_source = Some(LoadedSource::of(new));
    Ok(EtlReport {
        mode: if old.is_some() {
            EtlMode::Incremental
        } else {
            EtlMode::Full
        },
        load_date,
        source: LoadedSource::of(new),
        tables,
    })
}
