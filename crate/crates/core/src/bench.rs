//! Efficiency parameters, capacity tables and their renderings.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::campus::Snapshot;
use crate::etl::{run_etl, EtlReport, Warehouse};
use crate::relational::{table_stats, Database, QueryMetrics};
use crate::reports::{assert_equivalent, run_definition, Backend, Equivalence, ReportDefinition, ReportResult};
use crate::Error;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("efficiency is undefined for a baseline of {0}")]
    UndefinedEfficiency(f64),
    #[error("report sets differ: oltp {oltp:?}, dw {dw:?}")]
    MismatchedReports { oltp: Vec<u32>, dw: Vec<u32> },
    #[error("unknown format `{0}`; expected csv, json or markdown")]
    UnknownFormat(String),
}

/// `(old − new) / new × 100`; `new` must be positive.
pub fn efficiency_pct(old_value: f64, new_value: f64) -> Result<f64, BenchError> {
    if !new_value.is_finite() || !old_value.is_finite() || new_value <= 0.0 {
        return Err(BenchError::UndefinedEfficiency(new_value));
    }
    Ok((old_value - new_value) / new_value * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    TotalBytes,
    RecordsManaged,
    RecordLength,
    TablesUsed,
    WallTime,
    RowsProduced,
}

impl Parameter {
    pub const ALL: [Parameter; 6] = [
        Parameter::TotalBytes,
        Parameter::RecordsManaged,
        Parameter::RecordLength,
        Parameter::TablesUsed,
        Parameter::WallTime,
        Parameter::RowsProduced,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Parameter::TotalBytes => "total_bytes",
            Parameter::RecordsManaged => "records_managed",
            Parameter::RecordLength => "record_length",
            Parameter::TablesUsed => "tables_used",
            Parameter::WallTime => "wall_time",
            Parameter::RowsProduced => "rows_produced",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parameter::TotalBytes => "Total bytes",
            Parameter::RecordsManaged => "Records managed",
            Parameter::RecordLength => "Record length",
            Parameter::TablesUsed => "Tables used",
            Parameter::WallTime => "Wall time (s)",
            Parameter::RowsProduced => "Rows produced",
        }
    }
}

/// The six parameter values of one report on one backend, in
/// [`Parameter::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportMeasures {
    pub report_id: u32,
    pub values: [f64; 6],
}

impl ReportMeasures {
    pub fn from_metrics(report_id: u32, m: &QueryMetrics) -> Self {
        Self {
            report_id,
            values: [
                m.bytes_scanned as f64,
                m.records_scanned as f64,
                m.record_length_sum as f64,
                m.tables_used as f64,
                m.wall_time,
                m.rows_produced as f64,
            ],
        }
    }

    pub fn get(&self, p: Parameter) -> f64 {
        self.values[p as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub parameter: Parameter,
    pub oltp: f64,
    pub dw: f64,
    /// Absent when the dw value is not positive.
    pub efficiency_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportComparison {
    pub report_id: u32,
    pub cells: Vec<Cell>,
}

impl ReportComparison {
    pub fn cell(&self, p: Parameter) -> &Cell {
        &self.cells[p as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub reports: Vec<ReportComparison>,
    /// Plain mean over every defined efficiency cell.
    pub mean_efficiency_pct: Option<f64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl EfficiencyReport {
    pub fn report(&self, id: u32) -> Option<&ReportComparison> {
        self.reports.iter().find(|r| r.report_id == id)
    }
}

/// Pairs per-report measures of both backends; both slices must cover the
/// same report ids.
pub fn comparison_report(oltp: &[ReportMeasures], dw: &[ReportMeasures]) -> Result<EfficiencyReport, BenchError> {
    let ids = |v: &[ReportMeasures]| {
        let mut ids: Vec<u32> = v.iter().map(|m| m.report_id).collect();
        ids.sort_unstable();
        ids
    };
    let (oi, di) = (ids(oltp), ids(dw));
    if oi != di || oi.windows(2).any(|w| w[0] == w[1]) {
        return Err(BenchError::MismatchedReports { oltp: oi, dw: di });
    }
    let mut reports = Vec::with_capacity(oi.len());
    let mut defined = Vec::new();
    for id in oi {
        let o = oltp.iter().find(|m| m.report_id == id).expect("id from oltp");
        let d = dw.iter().find(|m| m.report_id == id).expect("id sets equal");
        let cells = Parameter::ALL
            .iter()
            .map(|&p| {
                let efficiency_pct = efficiency_pct(o.get(p), d.get(p)).ok();
                defined.extend(efficiency_pct);
                Cell {
                    parameter: p,
                    oltp: o.get(p),
                    dw: d.get(p),
                    efficiency_pct,
                }
            })
            .collect();
        reports.push(ReportComparison { report_id: id, cells });
    }
    let mean_efficiency_pct = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(EfficiencyReport {
        reports,
        mean_efficiency_pct,
        notes: Vec::new(),
    })
}

/// Per-report values as printed in the published comparison, OLTP side.
pub const PUBLISHED_OLTP: [ReportMeasures; 5] = [
    ReportMeasures {
        report_id: 1,
        values: [25_185_855.0, 43_004.0, 723.0, 4.0, 3.13, 279.0],
    },
    ReportMeasures {
        report_id: 2,
        values: [30_255_131.0, 117_111.0, 791.0, 5.0, 245.61, 74.0],
    },
    ReportMeasures {
        report_id: 3,
        values: [5_040_609.0, 74_134.0, 205.0, 4.0, 439.68, 3_091.0],
    },
    ReportMeasures {
        report_id: 4,
        values: [30_225_131.0, 117_111.0, 791.0, 5.0, 500.83, 368.0],
    },
    ReportMeasures {
        report_id: 5,
        values: [352_023.0, 3_384.0, 373.0, 4.0, 119.15, 592.0],
    },
];

/// Warehouse side of [`PUBLISHED_OLTP`].
pub const PUBLISHED_DW: [ReportMeasures; 5] = [
    ReportMeasures {
        report_id: 1,
        values: [10_046.0, 295.0, 69.0, 2.0, 0.01, 279.0],
    },
    ReportMeasures {
        report_id: 2,
        values: [3_742.0, 90.0, 78.0, 2.0, 0.01, 74.0],
    },
    ReportMeasures {
        report_id: 3,
        values: [4_774.0, 114.0, 78.0, 2.0, 0.01, 98.0],
    },
    ReportMeasures {
        report_id: 4,
        values: [16_752.0, 384.0, 79.0, 2.0, 0.01, 368.0],
    },
    ReportMeasures {
        report_id: 5,
        values: [38_481.0, 303.0, 127.0, 1.0, 0.01, 303.0],
    },
];

/// Headline mean efficiency as published.
pub const PUBLISHED_MEAN_EFFICIENCY: f64 = 461_801.84;
/// Published warehouse byte total.
pub const PUBLISHED_DW_TOTAL_BYTES: u64 = 71_555;

/// The published per-report pairs run through [`comparison_report`].
pub fn published_comparison() -> EfficiencyReport {
    let mut report = comparison_report(&PUBLISHED_OLTP, &PUBLISHED_DW).expect("published pairs cover reports 1 to 5");
    report.notes.extend(report.mean_efficiency_pct.and_then(mean_note));
    report
}

/// Note attached when a computed mean departs from the published headline.
pub fn mean_note(mean: f64) -> Option<String> {
    ((mean - PUBLISHED_MEAN_EFFICIENCY).abs() >= 0.005).then(|| {
        format!(
            "mean over all defined cells is {mean:.2}%; the published headline mean {PUBLISHED_MEAN_EFFICIENCY:.2}% \
             is not the plain mean of the published cells and its aggregation rule is unstated"
        )
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub table: String,
    pub record_length: u64,
    pub record_count: u64,
    pub total_bytes: u64,
}

/// Per-table sizes plus a totals row equal to the column sums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub title: String,
    pub rows: Vec<CapacityRow>,
    pub totals: CapacityRow,
    #[serde(default)]
    pub notes: Vec<String>,
}

pub fn capacity_report(title: &str, db: &Database) -> CapacityReport {
    let rows: Vec<CapacityRow> = db
        .tables()
        .iter()
        .map(|t| {
            let s = table_stats(t);
            CapacityRow {
                table: t.name().to_string(),
                record_length: s.record_length,
                record_count: s.record_count,
                total_bytes: s.total_bytes,
            }
        })
        .collect();
    let totals = CapacityRow {
        table: "Total".into(),
        record_length: rows.iter().map(|r| r.record_length).sum(),
        record_count: rows.iter().map(|r| r.record_count).sum(),
        total_bytes: rows.iter().map(|r| r.total_bytes).sum(),
    };
    let mut report = CapacityReport {
        title: title.to_string(),
        rows,
        totals,
        notes: Vec::new(),
    };
    if let Some(note) = published_total_note(&report) {
        report.notes.push(note);
    }
    report
}

/// The published warehouse byte total omits WPRODI's bytes; flag it when a
/// report reproduces the published per-table figures.
fn published_total_note(report: &CapacityReport) -> Option<String> {
    let wprodi = report.rows.iter().find(|r| r.table == "WPRODI")?;
    (report.totals.total_bytes == PUBLISHED_DW_TOTAL_BYTES + wprodi.total_bytes).then(|| {
        format!(
            "byte total is the column sum {}; the published total {PUBLISHED_DW_TOTAL_BYTES} differs by {} (the WPRODI row)",
            report.totals.total_bytes, wprodi.total_bytes
        )
    })
}

/// Totals of both backends with the efficiency of each column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityComparison {
    pub oltp: CapacityRow,
    pub dw: CapacityRow,
    /// Record length, record count and total bytes.
    pub efficiency_pct: [Option<f64>; 3],
}

pub fn capacity_comparison(oltp: &CapacityReport, dw: &CapacityReport) -> CapacityComparison {
    let (o, d) = (&oltp.totals, &dw.totals);
    let e = |a: u64, b: u64| efficiency_pct(a as f64, b as f64).ok();
    CapacityComparison {
        oltp: CapacityRow {
            table: "OLTP".into(),
            ..o.clone()
        },
        dw: CapacityRow {
            table: "DW".into(),
            ..d.clone()
        },
        efficiency_pct: [
            e(o.record_length, d.record_length),
            e(o.record_count, d.record_count),
            e(o.total_bytes, d.total_bytes),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(BenchError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Markdown => "markdown",
        })
    }
}

/// A document with a header row and data rows of pre-formatted cells.
pub trait Tabular: Serialize {
    fn title(&self) -> String;
    fn header(&self) -> Vec<String>;
    fn body(&self) -> Vec<Vec<String>>;
    fn notes(&self) -> &[String] {
        &[]
    }
}

fn fixed(v: f64) -> String {
    format!("{v:.2}")
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), fixed)
}

/// Renders `doc`; CSV and markdown use two-decimal point-separated numbers,
/// JSON keeps full precision.
pub fn render<T: Tabular>(doc: &T, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("document serializes") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(doc.header()).expect("in-memory write");
            for row in doc.body() {
                w.write_record(row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
        }
        Format::Markdown => {
            let mut out = format!("### {}\n\n", doc.title());
            let header = doc.header();
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for row in doc.body() {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
            for (i, note) in doc.notes().iter().enumerate() {
                let _ = writeln!(out, "{}[{}] {note}", if i == 0 { "\n" } else { "" }, i + 1);
            }
            out
        }
    }
}

impl Tabular for CapacityReport {
    fn title(&self) -> String {
        self.title.clone()
    }

    fn header(&self) -> Vec<String> {
        ["table", "record_length", "record_count", "total_bytes"]
            .map(String::from)
            .to_vec()
    }

    fn body(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .chain([&self.totals])
            .map(|r| {
                vec![
                    r.table.clone(),
                    r.record_length.to_string(),
                    r.record_count.to_string(),
                    r.total_bytes.to_string(),
                ]
            })
            .collect()
    }

    fn notes(&self) -> &[String] {
        &self.notes
    }
}

impl Tabular for CapacityComparison {
    fn title(&self) -> String {
        "Capacity totals, OLTP vs warehouse".into()
    }

    fn header(&self) -> Vec<String> {
        ["variable", "record_length", "record_count", "total_bytes"]
            .map(String::from)
            .to_vec()
    }

    fn body(&self) -> Vec<Vec<String>> {
        let row = |r: &CapacityRow| {
            vec![
                r.table.clone(),
                r.record_length.to_string(),
                r.record_count.to_string(),
                r.total_bytes.to_string(),
            ]
        };
        let mut eff = vec!["efficiency_pct".to_string()];
        eff.extend(self.efficiency_pct.iter().map(|&e| pct(e)));
        vec![row(&self.oltp), row(&self.dw), eff]
    }
}

impl Tabular for EfficiencyReport {
    fn title(&self) -> String {
        "Per-report efficiency, OLTP vs warehouse".into()
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["parameter".to_string(), "backend".to_string()];
        h.extend(self.reports.iter().map(|r| format!("report_{}", r.report_id)));
        h
    }

    fn body(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for p in Parameter::ALL {
            for backend in ["oltp", "dw", "efficiency_pct"] {
                let mut row = vec![p.key().to_string(), backend.to_string()];
                for r in &self.reports {
                    let c = r.cell(p);
                    row.push(match backend {
                        "oltp" => fixed(c.oltp),
                        "dw" => fixed(c.dw),
                        _ => pct(c.efficiency_pct),
                    });
                }
                rows.push(row);
            }
        }
        let mut mean = vec![
            "mean".to_string(),
            "efficiency_pct".to_string(),
            pct(self.mean_efficiency_pct),
        ];
        mean.resize(2 + self.reports.len(), String::new());
        rows.push(mean);
        rows
    }

    fn notes(&self) -> &[String] {
        &self.notes
    }
}

/// Everything one benchmark run produces.
#[derive(Debug, Clone, Serialize)]
pub struct BenchOutcome {
    pub oltp_capacity: CapacityReport,
    pub dw_capacity: CapacityReport,
    pub capacity: CapacityComparison,
    pub efficiency: EfficiencyReport,
    pub equivalence: Vec<Equivalence>,
    pub etl: EtlReport,
}

impl BenchOutcome {
    pub fn all_equivalent(&self) -> bool {
        self.equivalence.iter().all(|e| e.equivalent)
    }

    /// The four tables in order; JSON renders the whole outcome as one object.
    pub fn render(&self, format: Format) -> String {
        if format == Format::Json {
            return serde_json::to_string_pretty(self).expect("outcome serializes") + "\n";
        }
        [
            render(&self.oltp_capacity, format),
            render(&self.dw_capacity, format),
            render(&self.capacity, format),
            render(&self.efficiency, format),
        ]
        .join("\n")
    }
}

/// Runs `plan` `repeats` times and keeps the metrics of the median wall time.
fn median_run(
    def: &ReportDefinition,
    backend: Backend,
    db: &Database,
    as_of: NaiveDate,
    repeats: usize,
) -> Result<ReportResult, Error> {
    let mut runs = (0..repeats.max(1))
        .map(|_| run_definition(def, backend, db, as_of))
        .collect::<Result<Vec<_>, _>>()?;
    runs.sort_by(|a, b| a.metrics.wall_time.total_cmp(&b.metrics.wall_time));
    let mid = runs.len() / 2;
    Ok(runs.swap_remove(mid))
}

/// Loads `snapshot` into a fresh warehouse, runs every report on both
/// backends and compares them.
pub fn run_benchmark(snapshot: &Snapshot, repeats: usize) -> Result<BenchOutcome, Error> {
    let mut wh = Warehouse::campus();
    let etl = run_etl(None, snapshot, &mut wh)?;
    let as_of = snapshot.taken_on;
    let (mut oltp, mut dw, mut equivalence) = (Vec::new(), Vec::new(), Vec::new());
    for def in ReportDefinition::all() {
        let o = median_run(&def, Backend::Oltp, &snapshot.db, as_of, repeats)?;
        let d = median_run(&def, Backend::Warehouse, wh.db(), as_of, repeats)?;
        equivalence.push(assert_equivalent(&o, &d));
        oltp.push(ReportMeasures::from_metrics(def.id, &o.metrics));
        dw.push(ReportMeasures::from_metrics(def.id, &d.metrics));
    }
    let mut efficiency = comparison_report(&oltp, &dw)?;
    efficiency
        .notes
        .push("wall times are medians of repeated runs and depend on hardware".into());
    let oltp_capacity = capacity_report("OLTP capacity", &snapshot.db);
    let dw_capacity = capacity_report("Warehouse capacity", wh.db());
    let capacity = capacity_comparison(&oltp_capacity, &dw_capacity);
    Ok(BenchOutcome {
        oltp_capacity,
        dw_capacity,
        capacity,
        efficiency,
        equivalence,
        etl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_identities() {
        assert_eq!(efficiency_pct(7.0, 7.0).unwrap(), 0.0);
        assert!(efficiency_pct(5.0, 0.0).is_err());
        assert!(efficiency_pct(5.0, -1.0).is_err());
        assert!(efficiency_pct(f64::NAN, 1.0).is_err());
        assert!((efficiency_pct(4.0, 2.0).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("xml".parse::<Format>(), Err(BenchError::UnknownFormat("xml".into())));
    }

    #[test]
    fn mismatched_reports_are_rejected() {
        let err = comparison_report(&PUBLISHED_OLTP, &PUBLISHED_DW[..4]).unwrap_err();
        assert!(matches!(err, BenchError::MismatchedReports { .. }));
    }
}
