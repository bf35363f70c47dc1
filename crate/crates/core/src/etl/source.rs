//! Pre-aggregation records extracted from an OLTP snapshot, one record
//! layout per warehouse table.

use std::collections::{BTreeMap, HashMap};

use super::classify::classify_ratio;
use super::EtlError;
use crate::campus::grade_points;
use crate::campus::schema::*;
use crate::relational::{Database, Row, Table, Value};

/// Named-column record stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub fields: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Source {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| *f == name)
    }
}

fn col(t: &Table, name: &str) -> usize {
    t.schema()
        .field_index(name)
        .unwrap_or_else(|| panic!("{}.{name} is part of the OLTP schema", t.name()))
}

/// Lookup from a key column to a row of `t`.
fn index<'a>(t: &'a Table, key: &str) -> HashMap<&'a Value, &'a Row> {
    let k = col(t, key);
    t.rows().iter().map(|r| (&r[k], r)).collect()
}

fn lookup<'a>(map: &HashMap<&'a Value, &'a Row>, key: &Value, child: &str, parent: &str) -> Result<&'a Row, EtlError> {
    map.get(key)
        .copied()
        .ok_or_else(|| EtlError::Referential(format!("{child} references missing {parent} {key}")))
}

fn prodi(db: &Database) -> Result<Source, EtlError> {
    let (p, f, j) = (db.table(MPRODI)?, db.table(MFAKULTAS)?, db.table(MJENJANG)?);
    let (fak, jen) = (index(f, "kd_fakultas"), index(j, "kd_jenjang"));
    let mut rows = Vec::with_capacity(p.len());
    for r in p.rows() {
        let fr = lookup(&fak, &r[col(p, "kd_fakultas")], MPRODI, MFAKULTAS)?;
        let jr = lookup(&jen, &r[col(p, "kd_jenjang")], MPRODI, MJENJANG)?;
        rows.push(vec![
            r[col(p, "kd_prodi")].clone(),
            r[col(p, "singkatan_prodi")].clone(),
            fr[col(f, "singkatan_fakultas")].clone(),
            jr[col(j, "nm_jenjang")].clone(),
        ]);
    }
    Ok(Source {
        fields: vec!["kd_prodi", "singkatan_prodi", "singkatan_fakultas", "nm_jenjang"],
        rows,
    })
}

fn students(db: &Database) -> Result<Source, EtlError> {
    let m = db.table(MMAHASISWA)?;
    let idx = ["nim", "kd_prodi", "jenis_kelamin", "angkatan"].map(|n| col(m, n));
    Ok(Source {
        fields: vec!["nim", "kd_prodi", "jenis_kelamin", "angkatan"],
        rows: m
            .rows()
            .iter()
            .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
            .collect(),
    })
}

/// Enrolments with the program and intake recorded on the enrolment and
/// the student's gender.
fn enrolments(db: &Database) -> Result<Source, EtlError> {
    let (k, m) = (db.table(TRKRS)?, db.table(MMAHASISWA)?);
    let by_nim = index(m, "nim");
    let kidx = ["nim", "tahun_ajaran", "semester", "kd_prodi", "angkatan", "grade"].map(|n| col(k, n));
    let jk = col(m, "jenis_kelamin");
    let mut rows = Vec::with_capacity(k.len());
    for r in k.rows() {
        let s = lookup(&by_nim, &r[kidx[0]], TRKRS, MMAHASISWA)?;
        rows.push(vec![
            r[kidx[0]].clone(),
            r[kidx[1]].clone(),
            r[kidx[2]].clone(),
            r[kidx[3]].clone(),
            s[jk].clone(),
            r[kidx[4]].clone(),
            r[kidx[5]].clone(),
        ]);
    }
    Ok(Source {
        fields: vec![
            "nim",
            "tahun_ajaran",
            "semester",
            "kd_prodi",
            "jenis_kelamin",
            "angkatan",
            "grade",
        ],
        rows,
    })
}

/// One record per student-semester with a defined IPS.
fn ips(db: &Database) -> Result<Source, EtlError> {
    let k = db.table(TRKRS)?;
    let idx = [
        "nim",
        "tahun_ajaran",
        "semester",
        "kd_prodi",
        "angkatan",
        "grade",
        "sks",
    ]
    .map(|n| col(k, n));
    let mut groups: BTreeMap<Vec<&Value>, (i64, i64)> = BTreeMap::new();
    for r in k.rows() {
        let grade = r[idx[5]].as_str().unwrap_or(NO_EXAM);
        let sks = r[idx[6]].as_int().unwrap_or(0);
        let Some(points) = grade_points(grade) else {
            continue;
        };
        if sks <= 0 {
            continue;
        }
        let acc = groups.entry(idx[..5].iter().map(|&i| &r[i]).collect()).or_default();
        acc.0 += points * sks;
        acc.1 += sks;
    }
    let mut rows = Vec::with_capacity(groups.len());
    for (key, (points, credits)) in groups {
        let category = classify_ratio(points, credits)?;
        let mut row: Row = key.into_iter().cloned().collect();
        row.push(category.code().into());
        rows.push(row);
    }
    Ok(Source {
        fields: vec![
            "nim",
            "tahun_ajaran",
            "semester",
            "kd_prodi",
            "angkatan",
            "kategori_ips",
        ],
        rows,
    })
}

fn schedule(db: &Database) -> Result<Source, EtlError> {
    let (j, d, f, m) = (
        db.table(TJADKUL)?,
        db.table(TDOSFAK)?,
        db.table(MFAKULTAS)?,
        db.table(MTBMTKL)?,
    );
    let (dosen, fak, mtk) = (index(d, "kd_dosen"), index(f, "kd_fakultas"), index(m, "kd_mtk"));
    let jidx = ["tahun_ajaran", "semester", "kd_dosen", "kd_mtk", "kelas"].map(|n| col(j, n));
    let mut rows = Vec::with_capacity(j.len());
    for r in j.rows() {
        let dr = lookup(&dosen, &r[jidx[2]], TJADKUL, TDOSFAK)?;
        let fr = lookup(&fak, &dr[col(d, "kd_fakultas")], TDOSFAK, MFAKULTAS)?;
        let mr = lookup(&mtk, &r[jidx[3]], TJADKUL, MTBMTKL)?;
        rows.push(vec![
            r[jidx[0]].clone(),
            r[jidx[1]].clone(),
            r[jidx[2]].clone(),
            dr[col(d, "nm_dosen")].clone(),
            fr[col(f, "singkatan_fakultas")].clone(),
            r[jidx[3]].clone(),
            mr[col(m, "nm_singkat_mtk")].clone(),
            mr[col(m, "sks")].clone(),
            mr[col(m, "nm_pembina")].clone(),
            r[jidx[4]].clone(),
        ]);
    }
    Ok(Source {
        fields: vec![
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
        ],
        rows,
    })
}

/// Record stream feeding warehouse table `table`.
pub fn source_for(table: &str, db: &Database) -> Result<Source, EtlError> {
    match table {
        "WPRODI" => prodi(db),
        "WDATA1" => students(db),
        "WAKTIF" | "WGRADE" => enrolments(db),
        "WIPS" => ips(db),
        "WJADKUL" => schedule(db),
        other => Err(EtlError::NoTransform(other.to_string())),
    }
}
