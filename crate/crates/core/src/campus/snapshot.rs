//! Snapshot files: the old/new operational states the ETL compares.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::generate::{generate, GenConfig, GenError};
use super::schema::{build_oltp_schema, OLTP_TABLES};
use crate::relational::io::{read_tables, write_tables, FormatError};
use crate::relational::{Database, Table};

pub const SNAPSHOT_FORMAT: &str = "campus-oltp-snapshot/1";

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("malformed snapshot header: {0}")]
    Header(String),
    #[error("snapshot database lacks table `{0}`")]
    MissingTable(String),
}

impl From<std::io::Error> for SnapshotError {
    fn from(e: std::io::Error) -> Self {
        SnapshotError::Format(FormatError::Io(e))
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub config_hash: String,
    pub taken_on: NaiveDate,
    /// Tables in `OLTP_TABLES` order, rows sorted by primary key.
    pub db: Database,
}

impl Snapshot {
    pub fn new(mut db: Database, config_hash: impl Into<String>, taken_on: NaiveDate) -> Self {
        for table in OLTP_TABLES {
            if let Some(t) = db.get_mut(table) {
                t.sort_by_key();
            }
        }
        Snapshot {
            config_hash: config_hash.into(),
            taken_on,
            db,
        }
    }

    pub fn header(&self) -> String {
        format!("{SNAPSHOT_FORMAT} config={} taken={}", self.config_hash, self.taken_on)
    }

    pub fn total_records(&self) -> u64 {
        self.db.total_records()
    }

    /// Warning text when this snapshot was not produced by `config`.
    pub fn config_warning(&self, config: &GenConfig) -> Option<String> {
        let expected = config.config_hash();
        (expected != self.config_hash).then(|| {
            format!(
                "snapshot config hash {} differs from expected {expected}",
                self.config_hash
            )
        })
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), SnapshotError> {
        let tables = OLTP_TABLES
            .iter()
            .map(|&name| {
                self.db
                    .get(name)
                    .ok_or_else(|| SnapshotError::MissingTable(name.into()))
            })
            .collect::<Result<Vec<&Table>, _>>()?;
        write_tables(w, &self.header(), tables)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, SnapshotError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn read_from<R: std::io::BufRead>(reader: R) -> Result<Snapshot, SnapshotError> {
        let (header, db) = read_tables(reader, &build_oltp_schema().tables)?;
        let (config_hash, taken_on) = parse_header(&header)?;
        Ok(Snapshot::new(db, config_hash, taken_on))
    }
}

fn parse_header(line: &str) -> Result<(String, NaiveDate), SnapshotError> {
    let bad = || SnapshotError::Header(line.to_string());
    let mut parts = line.split(' ');
    if parts.next() != Some(SNAPSHOT_FORMAT) {
        return Err(bad());
    }
    let hash = parts.next().and_then(|p| p.strip_prefix("config=")).ok_or_else(bad)?;
    let taken = parts
        .next()
        .and_then(|p| p.strip_prefix("taken="))
        .and_then(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() || hash.is_empty() {
        return Err(bad());
    }
    Ok((hash.to_string(), taken))
}

/// Generates and packages a snapshot for `config`.
pub fn generate_snapshot(config: &GenConfig) -> Result<Snapshot, GenError> {
    let db = generate(config)?;
    Ok(Snapshot::new(db, config.config_hash(), config.taken_on))
}

pub fn snapshot(snap: &Snapshot, path: &Path) -> Result<(), SnapshotError> {
    let mut w = BufWriter::new(File::create(path)?);
    snap.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Loads a snapshot file. When `expected` is given and its hash differs,
/// the mismatch is logged as a warning and the snapshot is still returned.
pub fn load_snapshot(path: &Path, expected: Option<&GenConfig>) -> Result<Snapshot, SnapshotError> {
    let snap = Snapshot::read_from(BufReader::new(File::open(path)?))?;
    if let Some(warning) = expected.and_then(|c| snap.config_warning(c)) {
        log::warn!("{}: {warning}", path.display());
    }
    Ok(snap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let date = NaiveDate::from_ymd_opt(2010, 2, 1).unwrap();
        let s = Snapshot::new(Database::from_schemas(build_oltp_schema().tables), "abc", date);
        assert_eq!(parse_header(&s.header()).unwrap(), ("abc".to_string(), date));
        assert!(parse_header("campus-oltp-snapshot/2 config=a taken=2010-02-01").is_err());
        assert!(parse_header("campus-oltp-snapshot/1 config=a").is_err());
        assert!(parse_header("campus-oltp-snapshot/1 config=a taken=2010-13-01").is_err());
    }

    #[test]
    fn warning_on_foreign_config() {
        let c = GenConfig::desk(2);
        let snap = generate_snapshot(&c).unwrap();
        assert!(snap.config_warning(&c).is_none());
        assert!(snap.config_warning(&GenConfig::desk(3)).is_some());
    }
}
