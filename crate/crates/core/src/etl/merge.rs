//! Constructive merge with tglmula/tglakhir effective dating.

use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::EtlError;
use crate::relational::{Row, Table, Value};
use crate::star::{TGLAKHIR, TGLMULA};

/// Stored tglakhir of a row that is still valid.
pub fn open_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(9999, 12, 31).expect("valid date")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LoadStats {
    pub inserted: u64,
    pub closed: u64,
    pub unchanged: u64,
    pub load_date: Option<NaiveDate>,
}

struct Validity {
    mula: usize,
    akhir: usize,
}

fn validity(table: &Table) -> Result<Validity, EtlError> {
    let s = table.schema();
    match (s.field_index(TGLMULA), s.field_index(TGLAKHIR)) {
        (Some(mula), Some(akhir)) if akhir + 1 == s.fields.len() && mula + 2 == s.fields.len() => {
            Ok(Validity { mula, akhir })
        }
        _ => Err(EtlError::NotHistorized(s.name.clone())),
    }
}

/// Business-key positions within a staged (date-less) row.
pub(crate) fn key_positions(table: &Table) -> Vec<usize> {
    table.schema().key_indices()
}

fn is_open(row: &Row, v: &Validity) -> bool {
    row[v.akhir] == Value::Date(open_date())
}

/// Merges `staged` rows (the table's fields without the two validity
/// dates) into `target` as of `load_date`.
///
/// Open rows whose key is in `scope` but absent from `staged` are closed;
/// with `scope = None` every key is in scope. Rows are never removed.
pub fn constructive_merge(
    target: &mut Table,
    staged: &[Row],
    load_date: NaiveDate,
    scope: Option<&HashSet<Row>>,
) -> Result<LoadStats, EtlError> {
    let v = validity(target)?;
    let key_idx = key_positions(target);
    let key_of = |row: &Row| -> Row { key_idx.iter().map(|&i| row[i].clone()).collect() };

    let mut open: HashMap<Row, usize> = HashMap::new();
    for (pos, row) in target.rows().iter().enumerate() {
        if !is_open(row, &v) {
            continue;
        }
        let mula = row[v.mula].as_date().unwrap_or(load_date);
        if mula > load_date {
            return Err(EtlError::LoadDateRegression {
                table: target.name().to_string(),
                load_date,
                open_since: mula,
            });
        }
        if open.insert(key_of(row), pos).is_some() {
            return Err(EtlError::MultipleOpen(target.name().to_string()));
        }
    }

    let mut stats = LoadStats {
        load_date: Some(load_date),
        ..LoadStats::default()
    };
    let mut seen: HashSet<Row> = HashSet::with_capacity(staged.len());
    let mut to_close: Vec<usize> = Vec::new();
    let mut to_insert: Vec<&Row> = Vec::new();
    for row in staged {
        if row.len() != v.mula {
            return Err(EtlError::StagedArity {
                table: target.name().to_string(),
                expected: v.mula,
                found: row.len(),
            });
        }
        let key = key_of(row);
        match open.get(&key) {
            Some(&pos) if target.rows()[pos][..v.mula] == row[..] => stats.unchanged += 1,
            Some(&pos) => {
                to_close.push(pos);
                to_insert.push(row);
            }
            None => to_insert.push(row),
        }
        if !seen.insert(key) {
            return Err(EtlError::DuplicateStagedKey(target.name().to_string()));
        }
    }
    for (key, &pos) in &open {
        if seen.contains(key) {
            continue;
        }
        if scope.is_none_or(|s| s.contains(key)) {
            to_close.push(pos);
        } else {
            stats.unchanged += 1;
        }
    }

    to_close.sort_unstable();
    for pos in to_close {
        target.update(pos, TGLAKHIR, Value::Date(load_date))?;
        stats.closed += 1;
    }
    for row in to_insert {
        let mut full = row.clone();
        full.push(Value::Date(load_date));
        full.push(Value::Date(open_date()));
        target.insert(full)?;
        stats.inserted += 1;
    }
    Ok(stats)
}

/// Rows valid at `as_of`: tglmula ≤ as_of < tglakhir.
pub fn current_view(table: &Table, as_of: NaiveDate) -> Result<Vec<Row>, EtlError> {
    let v = validity(table)?;
    Ok(table
        .rows()
        .iter()
        .filter(|r| {
            let (mula, akhir) = (r[v.mula].as_date(), r[v.akhir].as_date());
            matches!((mula, akhir), (Some(m), Some(a)) if m <= as_of && as_of < a)
        })
        .cloned()
        .collect())
}
