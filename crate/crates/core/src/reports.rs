//! The five management reports as plans over both backends.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::campus::grade_points;
use crate::campus::schema::NO_EXAM;
use crate::etl::{classify_ratio, IpsCategory};
use crate::relational::{
    run_metered, Aggregate, CmpOp, Database, ExecError, FieldSpec, Plan, Predicate, QueryMetrics, Row, Table, Value,
};
use crate::star::{ReportDocument, TGLAKHIR, TGLMULA};

pub const REPORT_IDS: [u32; 5] = [1, 2, 3, 4, 5];
pub const MEASURE: &str = "jumlah";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Oltp,
    #[serde(rename = "dw")]
    Warehouse,
}

impl Backend {
    pub fn code(self) -> &'static str {
        match self {
            Backend::Oltp => "oltp",
            Backend::Warehouse => "dw",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Backend {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oltp" => Ok(Backend::Oltp),
            "dw" | "warehouse" => Ok(Backend::Warehouse),
            other => Err(ReportError::UnknownBackend(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("unknown report id {0}; valid ids are 1 to 5")]
    UnknownReport(u32),
    #[error("unknown backend `{0}`; expected oltp or dw")]
    UnknownBackend(String),
    #[error("database lacks table `{table}` needed by the {backend} plan")]
    BackendMismatch { backend: Backend, table: String },
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Program attributes every aggregated report is broken down by.
const PRODI_GRAIN: [&str; 4] = ["nm_jenjang", "singkatan_fakultas", "kd_prodi", "singkatan_prodi"];
const TERM: [&str; 2] = ["tahun_ajaran", "semester"];
const SCHEDULE_GRAIN: [&str; 10] = [
    "tahun_ajaran",
    "semester",
    "kd_dosen",
    "nm_dosen",
    "singkatan_fakultas",
    "kd_mtk",
    "nm_singkat_mtk",
    "sks",
    "nm_pembina",
    "kelas",
];

#[derive(Debug, Clone)]
pub struct ReportDefinition {
    pub id: u32,
    pub name: String,
    pub title: String,
    pub grain: Vec<String>,
    /// Empty for the schedule listing.
    pub measures: Vec<String>,
    pub oltp_plan: Plan,
    /// Fact table read by the warehouse plan.
    fact: &'static str,
    joins_prodi: bool,
}

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn with_prodi(before: &[&str], after: &[&str]) -> Vec<String> {
    before
        .iter()
        .chain(&PRODI_GRAIN)
        .chain(after)
        .map(|s| s.to_string())
        .collect()
}

/// `input` joined to MPRODI, MFAKULTAS and MJENJANG on its `kd_prodi`.
fn join_prodi_chain(input: Plan) -> Plan {
    input
        .join(Plan::scan("MPRODI"), &[("kd_prodi", "kd_prodi")])
        .join(Plan::scan("MFAKULTAS"), &[("kd_fakultas", "kd_fakultas")])
        .join(Plan::scan("MJENJANG"), &[("kd_jenjang", "kd_jenjang")])
}

fn enrolments_with_students() -> Plan {
    Plan::scan("TRKRS").join(Plan::scan("MMAHASISWA"), &[("nim", "nim")])
}

fn weighted_points() -> crate::relational::ScalarFn {
    Arc::new(|args: &[&Value]| {
        let grade = args[0].as_str().ok_or("grade is not text")?;
        let sks = args[1].as_int().ok_or("sks is not an integer")?;
        let points = grade_points(grade).ok_or_else(|| format!("grade {grade:?} has no points"))?;
        Ok(Value::Int(points * sks))
    })
}

fn ips_category() -> crate::relational::ScalarFn {
    Arc::new(|args: &[&Value]| {
        let points = args[0].as_int().ok_or("points are not an integer")?;
        let credits = args[1].as_int().ok_or("credits are not an integer")?;
        let c = classify_ratio(points, credits).map_err(|e| e.to_string())?;
        Ok(Value::text(c.code()))
    })
}

fn ips_oltp_plan(grain: &[String]) -> Plan {
    let graded = Plan::scan_where(
        "TRKRS",
        Predicate::ne("grade", NO_EXAM).and(Predicate::cmp("sks", CmpOp::Gt, 0)),
    )
    .derive(FieldSpec::integer("bobot", 4), &["grade", "sks"], weighted_points())
    .aggregate(
        &["nim", "tahun_ajaran", "semester", "kd_prodi", "angkatan"],
        vec![Aggregate::sum("bobot", "bobot"), Aggregate::sum("sks", "total_sks")],
    )
    .derive(
        FieldSpec::enumeration("kategori_ips", 1, IpsCategory::ALL.map(IpsCategory::code)),
        &["bobot", "total_sks"],
        ips_category(),
    );
    join_prodi_chain(graded).aggregate(grain, vec![Aggregate::count(MEASURE)])
}

impl ReportDefinition {
    pub fn get(id: u32) -> Result<Self, ReportError> {
        let doc = ReportDocument::campus();
        let decl = doc.report(id).ok_or(ReportError::UnknownReport(id))?;
        let measures = vec![MEASURE.to_string()];
        let (grain, measures, oltp_plan, fact, joins_prodi) = match id {
            1 => {
                let grain = with_prodi(&[], &["jenis_kelamin", "angkatan"]);
                let plan =
                    join_prodi_chain(Plan::scan("MMAHASISWA")).aggregate(&grain, vec![Aggregate::count(MEASURE)]);
                (grain, measures, plan, "WDATA1", true)
            }
            2 => {
                let grain = with_prodi(&TERM, &["jenis_kelamin", "angkatan"]);
                let plan = join_prodi_chain(enrolments_with_students())
                    .aggregate(&grain, vec![Aggregate::count_distinct("nim", MEASURE)]);
                (grain, measures, plan, "WAKTIF", true)
            }
            3 => {
                let grain = with_prodi(&TERM, &["angkatan", "kategori_ips"]);
                let plan = ips_oltp_plan(&grain);
                (grain, measures, plan, "WIPS", true)
            }
            4 => {
                let grain = with_prodi(&TERM, &["jenis_kelamin", "angkatan", "grade"]);
                let plan =
                    join_prodi_chain(enrolments_with_students()).aggregate(&grain, vec![Aggregate::count(MEASURE)]);
                (grain, measures, plan, "WGRADE", true)
            }
            5 => {
                let grain = owned(&SCHEDULE_GRAIN);
                let plan = Plan::scan("TJADKUL")
                    .join(Plan::scan("TDOSFAK"), &[("kd_dosen", "kd_dosen")])
                    .join(Plan::scan("MFAKULTAS"), &[("kd_fakultas", "kd_fakultas")])
                    .join(Plan::scan("MTBMTKL"), &[("kd_mtk", "kd_mtk")])
                    .aggregate(&grain, vec![]);
                (grain, Vec::new(), plan, "WJADKUL", false)
            }
            other => return Err(ReportError::UnknownReport(other)),
        };
        Ok(Self {
            id,
            name: decl.name.clone(),
            title: decl.title.clone(),
            grain,
            measures,
            oltp_plan,
            fact,
            joins_prodi,
        })
    }

    pub fn all() -> Vec<Self> {
        REPORT_IDS
            .iter()
            .map(|&id| Self::get(id).expect("bundled report"))
            .collect()
    }

    /// Output columns: grain then measures.
    pub fn columns(&self) -> Vec<String> {
        self.grain.iter().chain(&self.measures).cloned().collect()
    }

    /// Warehouse plan reading the rows valid at `as_of`.
    pub fn dw_plan(&self, as_of: NaiveDate) -> Plan {
        let valid = || Predicate::cmp(TGLMULA, CmpOp::Le, as_of).and(Predicate::cmp(TGLAKHIR, CmpOp::Gt, as_of));
        let mut plan = Plan::scan_where(self.fact, valid());
        if self.joins_prodi {
            plan = plan.join(Plan::scan_where("WPRODI", valid()), &[("kd_prodi", "kd_prodi")]);
        }
        let aggregates = self.measures.iter().map(|m| Aggregate::sum(m, m)).collect();
        plan.aggregate(&self.grain, aggregates)
    }

    pub fn plan(&self, backend: Backend, as_of: NaiveDate) -> Plan {
        match backend {
            Backend::Oltp => self.oltp_plan.clone(),
            Backend::Warehouse => self.dw_plan(as_of),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportResult {
    pub report_id: u32,
    pub backend: Backend,
    pub rows: Table,
    pub metrics: QueryMetrics,
}

impl ReportResult {
    pub fn columns(&self) -> Vec<String> {
        self.rows.schema().field_names().map(str::to_string).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns()).expect("in-memory write");
        for row in self.rows.rows() {
            w.write_record(row.iter().map(Value::to_string))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_markdown(&self) -> String {
        let columns = self.columns();
        let mut out = format!(
            "### Report {} ({})\n\n| {} |\n",
            self.report_id,
            self.backend,
            columns.join(" | ")
        );
        out += &format!("|{}\n", "---|".repeat(columns.len()));
        for row in self.rows.rows() {
            let cells: Vec<String> = row.iter().map(Value::to_string).collect();
            out += &format!("| {} |\n", cells.join(" | "));
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            report_id: u32,
            backend: Backend,
            columns: Vec<String>,
            rows: &'a [Row],
            metrics: &'a QueryMetrics,
        }
        serde_json::to_string_pretty(&Doc {
            report_id: self.report_id,
            backend: self.backend,
            columns: self.columns(),
            rows: self.rows.rows(),
            metrics: &self.metrics,
        })
        .expect("report serializes")
    }
}

/// Runs report `id` against `db`; warehouse plans read rows valid at `as_of`.
pub fn run_report(id: u32, backend: Backend, db: &Database, as_of: NaiveDate) -> Result<ReportResult, ReportError> {
    let def = ReportDefinition::get(id)?;
    run_definition(&def, backend, db, as_of)
}

pub fn run_definition(
    def: &ReportDefinition,
    backend: Backend,
    db: &Database,
    as_of: NaiveDate,
) -> Result<ReportResult, ReportError> {
    let plan = def.plan(backend, as_of);
    if let Some(missing) = plan.base_tables().into_iter().find(|t| db.get(t).is_none()) {
        return Err(ReportError::BackendMismatch {
            backend,
            table: missing.to_string(),
        });
    }
    let (rows, metrics) = run_metered(db, &plan)?;
    Ok(ReportResult {
        report_id: def.id,
        backend,
        rows,
        metrics,
    })
}

/// Outcome of comparing one report across backends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equivalence {
    pub report_id: u32,
    pub equivalent: bool,
    pub oltp_columns: Vec<String>,
    pub dw_columns: Vec<String>,
    pub only_oltp: Vec<Row>,
    pub only_dw: Vec<Row>,
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.equivalent {
            return write!(f, "report {}: equivalent", self.report_id);
        }
        writeln!(f, "report {}: NOT equivalent", self.report_id)?;
        if self.oltp_columns != self.dw_columns {
            writeln!(f, "  columns differ: {:?} vs {:?}", self.oltp_columns, self.dw_columns)?;
        }
        for (label, rows) in [("oltp only", &self.only_oltp), ("dw only", &self.only_dw)] {
            for r in rows.iter().take(20) {
                let cells: Vec<String> = r.iter().map(Value::to_string).collect();
                writeln!(f, "  {label}: {}", cells.join("|"))?;
            }
            if rows.len() > 20 {
                writeln!(f, "  {label}: ... {} more", rows.len() - 20)?;
            }
        }
        Ok(())
    }
}

/// Compares the row multisets of two results over the same columns.
pub fn assert_equivalent(oltp: &ReportResult, dw: &ReportResult) -> Equivalence {
    let (oc, dc) = (oltp.columns(), dw.columns());
    let mut a: Vec<&Row> = oltp.rows.rows().iter().collect();
    let mut b: Vec<&Row> = dw.rows.rows().iter().collect();
    a.sort();
    b.sort();
    let (mut only_oltp, mut only_dw) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                only_oltp.push((*x).clone());
                i += 1;
            }
            (Some(_), Some(y)) | (None, Some(y)) => {
                only_dw.push((*y).clone());
                j += 1;
            }
            (Some(x), None) => {
                only_oltp.push((*x).clone());
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Equivalence {
        report_id: oltp.report_id,
        equivalent: oltp.report_id == dw.report_id && oc == dc && only_oltp.is_empty() && only_dw.is_empty(),
        oltp_columns: oc,
        dw_columns: dc,
        only_oltp,
        only_dw,
    }
}
