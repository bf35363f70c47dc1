//! Per-query instrumentation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// The six measured parameters of one query execution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    /// Distinct base tables read by the plan.
    pub tables_used: u64,
    /// Rows read from base tables, summed over every scan.
    pub records_scanned: u64,
    /// Sum of record lengths of the distinct tables used.
    pub record_length_sum: u64,
    /// Σ over scans of rows read × that table's record length.
    pub bytes_scanned: u64,
    /// Seconds spent executing the plan.
    pub wall_time: f64,
    pub rows_produced: u64,
}

impl QueryMetrics {
    /// Same metrics ignoring wall time.
    pub fn same_work(&self, other: &QueryMetrics) -> bool {
        QueryMetrics {
            wall_time: 0.0,
            ..*self
        } == QueryMetrics {
            wall_time: 0.0,
            ..*other
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct TableMeter {
    record_length: u64,
    rows_read: u64,
}

/// Accumulates scan counters while a plan runs.
#[derive(Debug, Default, Clone)]
pub struct Meter {
    tables: BTreeMap<String, TableMeter>,
}

impl Meter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_scan(&mut self, table: &str, record_length: usize, rows_read: usize) {
        let entry = self.tables.entry(table.to_string()).or_default();
        entry.record_length = record_length as u64;
        entry.rows_read += rows_read as u64;
    }

    pub fn bytes_scanned(&self) -> u64 {
        self.tables.values().map(|t| t.rows_read * t.record_length).sum()
    }

    pub fn tables(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn finish(&self, wall_time: f64, rows_produced: usize) -> QueryMetrics {
        QueryMetrics {
            tables_used: self.tables.len() as u64,
            records_scanned: self.tables.values().map(|t| t.rows_read).sum(),
            record_length_sum: self.tables.values().map(|t| t.record_length).sum(),
            bytes_scanned: self.bytes_scanned(),
            wall_time,
            rows_produced: rows_produced as u64,
        }
    }
}
