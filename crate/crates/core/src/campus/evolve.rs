//! Random operational activity between two snapshots.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::kelas_label;
use super::schema::*;
use super::snapshot::Snapshot;
use crate::relational::{Database, Row, TableError, Value};

/// Applies `changes` random edits to a copy of `base`, dated `taken_on`.
///
/// Edits keep every foreign key resolvable: new enrolments, grade
/// corrections, dropped courses, withdrawals (with their enrolments),
/// gender and program corrections, lecturer swaps, new classes and
/// program or faculty renames.
pub fn evolve(base: &Snapshot, seed: u64, changes: usize, taken_on: NaiveDate) -> Result<Snapshot, TableError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = base.db.clone();
    for _ in 0..changes {
        match rng.gen_range(0..10) {
            0 | 1 => new_student(&mut db, &mut rng)?,
            2 => regrade(&mut db, &mut rng)?,
            3 => drop_enrolment(&mut db, &mut rng)?,
            4 => withdraw(&mut db, &mut rng)?,
            5 => set_random(&mut db, &mut rng, MMAHASISWA, "jenis_kelamin", |rng| {
                (*GENDERS.choose(rng).unwrap()).into()
            })?,
            6 => move_student(&mut db, &mut rng)?,
            7 => swap_lecturer(&mut db, &mut rng)?,
            8 => new_class(&mut db, &mut rng)?,
            _ => rename(&mut db, &mut rng)?,
        }
    }
    Ok(Snapshot::new(db, base.config_hash.clone(), taken_on))
}

fn field(db: &Database, table: &str, name: &str) -> usize {
    db.get(table)
        .and_then(|t| t.schema().field_index(name))
        .unwrap_or_else(|| panic!("{table}.{name} is part of the OLTP schema"))
}

fn random_row(db: &Database, table: &str, rng: &mut ChaCha8Rng) -> Option<(usize, Row)> {
    let t = db.get(table)?;
    (!t.is_empty()).then(|| {
        let pos = rng.gen_range(0..t.len());
        (pos, t.rows()[pos].clone())
    })
}

fn set_random(
    db: &mut Database,
    rng: &mut ChaCha8Rng,
    table: &str,
    name: &str,
    value: impl Fn(&mut ChaCha8Rng) -> Value,
) -> Result<(), TableError> {
    if let Some((pos, _)) = random_row(db, table, rng) {
        let v = value(rng);
        db.table_mut(table)?.update(pos, name, v)?;
    }
    Ok(())
}

fn terms(db: &Database) -> Vec<(i64, String)> {
    let (ta, sem) = (field(db, TRKRS, "tahun_ajaran"), field(db, TRKRS, "semester"));
    let set: BTreeSet<(i64, String)> = db
        .get(TRKRS)
        .map(|t| {
            t.rows()
                .iter()
                .map(|r| (r[ta].as_int().unwrap_or(0), r[sem].as_str().unwrap_or("").to_string()))
                .collect()
        })
        .unwrap_or_default();
    set.into_iter().collect()
}

fn new_student(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    let Some((_, prodi)) = random_row(db, MPRODI, rng) else {
        return Ok(());
    };
    let students = db.table(MMAHASISWA)?;
    let nim = loop {
        let candidate = format!("9{:09}", rng.gen_range(0..1_000_000_000u64));
        let taken = students
            .rows()
            .iter()
            .any(|r| r[0].as_str() == Some(candidate.as_str()));
        if !taken {
            break candidate;
        }
    };
    let (ta, sem) = terms(db)
        .choose(rng)
        .cloned()
        .unwrap_or((2009, Semester::Gasal.code().to_string()));
    let angkatan = ta - rng.gen_range(0..3);
    let kd_prodi = prodi[field(db, MPRODI, "kd_prodi")].clone();
    db.insert(
        MMAHASISWA,
        vec![
            nim.clone().into(),
            "Mahasiswa Baru".into(),
            (*GENDERS.choose(rng).unwrap()).into(),
            Value::Int(angkatan),
            kd_prodi.clone(),
            "".into(),
        ],
    )?;
    let courses: Vec<Row> = db.table(MTBMTKL)?.rows().iter().cloned().choose_multiple(rng, 4);
    let (kd_mtk, sks) = (field(db, MTBMTKL, "kd_mtk"), field(db, MTBMTKL, "sks"));
    for course in courses {
        db.insert(
            TRKRS,
            vec![
                nim.clone().into(),
                Value::Int(ta),
                sem.clone().into(),
                course[kd_mtk].clone(),
                kd_prodi.clone(),
                Value::Int(angkatan),
                course[sks].clone(),
                (*GRADES.choose(rng).unwrap()).into(),
                "".into(),
            ],
        )?;
    }
    Ok(())
}

fn regrade(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    set_random(db, rng, TRKRS, "grade", |rng| (*GRADES.choose(rng).unwrap()).into())
}

fn drop_enrolment(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    if let Some((_, row)) = random_row(db, TRKRS, rng) {
        db.table_mut(TRKRS)?.delete_where(|r| *r == row);
    }
    Ok(())
}

fn withdraw(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    if let Some((_, row)) = random_row(db, MMAHASISWA, rng) {
        let nim = row[field(db, MMAHASISWA, "nim")].clone();
        let krs_nim = field(db, TRKRS, "nim");
        db.table_mut(TRKRS)?.delete_where(|r| r[krs_nim] == nim);
        db.table_mut(MMAHASISWA)?.delete_where(|r| *r == row);
    }
    Ok(())
}

fn move_student(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    let Some((_, prodi)) = random_row(db, MPRODI, rng) else {
        return Ok(());
    };
    let kd = prodi[field(db, MPRODI, "kd_prodi")].clone();
    set_random(db, rng, MMAHASISWA, "kd_prodi", |_| kd.clone())
}

fn swap_lecturer(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    let (Some((_, session)), Some((_, dosen))) = (random_row(db, TJADKUL, rng), random_row(db, TDOSFAK, rng)) else {
        return Ok(());
    };
    let class: Vec<usize> = ["tahun_ajaran", "semester", "kd_mtk", "kelas"]
        .iter()
        .map(|f| field(db, TJADKUL, f))
        .collect();
    let kd = dosen[field(db, TDOSFAK, "kd_dosen")].clone();
    let table = db.table_mut(TJADKUL)?;
    let positions: Vec<usize> = table
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, r)| class.iter().all(|&i| r[i] == session[i]))
        .map(|(p, _)| p)
        .collect();
    for pos in positions {
        table.update(pos, "kd_dosen", kd.clone())?;
    }
    Ok(())
}

fn new_class(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    let (Some((_, course)), Some((_, dosen))) = (random_row(db, MTBMTKL, rng), random_row(db, TDOSFAK, rng)) else {
        return Ok(());
    };
    let (ta, sem) = terms(db)
        .choose(rng)
        .cloned()
        .unwrap_or((2009, Semester::Gasal.code().to_string()));
    let kd_mtk = course[field(db, MTBMTKL, "kd_mtk")].clone();
    let (mtk_i, kelas_i) = (field(db, TJADKUL, "kd_mtk"), field(db, TJADKUL, "kelas"));
    let used: BTreeSet<String> = db
        .table(TJADKUL)?
        .rows()
        .iter()
        .filter(|r| r[mtk_i] == kd_mtk && r[0] == Value::Int(ta) && r[1].as_str() == Some(sem.as_str()))
        .filter_map(|r| r[kelas_i].as_str().map(str::to_string))
        .collect();
    let Some(kelas) = (0..).map(kelas_label).find(|k| !used.contains(k)) else {
        return Ok(());
    };
    let kd_dosen = dosen[field(db, TDOSFAK, "kd_dosen")].clone();
    for pertemuan in 1..=rng.gen_range(4..=7) {
        db.insert(
            TJADKUL,
            vec![
                Value::Int(ta),
                sem.clone().into(),
                kd_mtk.clone(),
                kelas.clone().into(),
                Value::Int(pertemuan),
                kd_dosen.clone(),
                "".into(),
            ],
        )?;
    }
    Ok(())
}

fn rename(db: &mut Database, rng: &mut ChaCha8Rng) -> Result<(), TableError> {
    let (table, name) = *[(MPRODI, "singkatan_prodi"), (MFAKULTAS, "singkatan_fakultas")]
        .choose(rng)
        .unwrap();
    let i = field(db, table, name);
    if let Some((pos, row)) = random_row(db, table, rng) {
        let old = row[i].as_str().unwrap_or("");
        let stem: String = old.chars().take(3).collect();
        let renamed = format!("{stem}{}", rng.gen_range(0..10));
        db.table_mut(table)?.update(pos, name, renamed.into())?;
    }
    Ok(())
}
