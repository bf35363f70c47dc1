//! Independent oracles shared by integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use campusdw::etl::{open_date, Warehouse};
use campusdw::relational::{Database, Row, Table, Value};
use campusdw::star::{TGLAKHIR, TGLMULA};
use chrono::NaiveDate;

pub type Tally = BTreeMap<Vec<String>, i64>;

fn get(t: &Table, row: &Row, field: &str) -> String {
    match t.value(row, field).unwrap_or_else(|| panic!("{}.{field}", t.name())) {
        Value::Int(v) => v.to_string(),
        Value::Text(s) => s.clone(),
        other => format!("{other:?}"),
    }
}

fn points(grade: &str) -> Option<f64> {
    Some(match grade {
        "A" => 4.0,
        "B" => 3.0,
        "C" => 2.0,
        "D" => 1.0,
        "E" => 0.0,
        _ => return None,
    })
}

fn category(ips: f64) -> &'static str {
    if ips < 2.5 {
        "K"
    } else if ips <= 3.0 {
        "C"
    } else {
        "B"
    }
}

/// Per-table cell tallies computed by direct iteration over the snapshot:
/// fact cells map grain values (schema order) to the measure; WPRODI and
/// WJADKUL map rows to 1.
pub fn brute_force(db: &Database) -> BTreeMap<&'static str, Tally> {
    let m = db.table("MMAHASISWA").unwrap();
    let k = db.table("TRKRS").unwrap();
    let student: HashMap<String, &Row> = m.rows().iter().map(|r| (get(m, r, "nim"), r)).collect();
    let mut out: BTreeMap<&'static str, Tally> = BTreeMap::new();

    let mut wdata1 = Tally::new();
    for r in m.rows() {
        *wdata1
            .entry(vec![
                get(m, r, "kd_prodi"),
                get(m, r, "jenis_kelamin"),
                get(m, r, "angkatan"),
            ])
            .or_default() += 1;
    }
    out.insert("WDATA1", wdata1);

    let mut active: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
    let mut wgrade = Tally::new();
    let mut ips: BTreeMap<Vec<String>, (f64, f64)> = BTreeMap::new();
    for r in k.rows() {
        let nim = get(k, r, "nim");
        let jk = get(m, student[&nim], "jenis_kelamin");
        let cell = vec![
            get(k, r, "tahun_ajaran"),
            get(k, r, "semester"),
            get(k, r, "kd_prodi"),
            jk,
            get(k, r, "angkatan"),
        ];
        active.entry(cell.clone()).or_default().insert(nim.clone());
        let mut g = cell;
        g.push(get(k, r, "grade"));
        *wgrade.entry(g).or_default() += 1;
        let sks: f64 = get(k, r, "sks").parse().unwrap();
        if let Some(p) = points(&get(k, r, "grade")) {
            if sks > 0.0 {
                let key = vec![
                    nim,
                    get(k, r, "tahun_ajaran"),
                    get(k, r, "semester"),
                    get(k, r, "kd_prodi"),
                    get(k, r, "angkatan"),
                ];
                let acc = ips.entry(key).or_default();
                acc.0 += p * sks;
                acc.1 += sks;
            }
        }
    }
    out.insert("WAKTIF", active.into_iter().map(|(c, s)| (c, s.len() as i64)).collect());
    out.insert("WGRADE", wgrade);
    let mut wips = Tally::new();
    for (key, (p, s)) in ips {
        let mut cell = key[1..].to_vec();
        cell.push(category(p / s).to_string());
        *wips.entry(cell).or_default() += 1;
    }
    out.insert("WIPS", wips);

    let (p, f, j) = (
        db.table("MPRODI").unwrap(),
        db.table("MFAKULTAS").unwrap(),
        db.table("MJENJANG").unwrap(),
    );
    let mut wprodi = Tally::new();
    for r in p.rows() {
        let fr = f
            .rows()
            .iter()
            .find(|x| get(f, x, "kd_fakultas") == get(p, r, "kd_fakultas"))
            .unwrap();
        let jr = j
            .rows()
            .iter()
            .find(|x| get(j, x, "kd_jenjang") == get(p, r, "kd_jenjang"))
            .unwrap();
        let row = vec![
            get(p, r, "kd_prodi"),
            get(p, r, "singkatan_prodi"),
            get(f, fr, "singkatan_fakultas"),
            get(j, jr, "nm_jenjang"),
        ];
        *wprodi.entry(row).or_default() += 1;
    }
    out.insert("WPRODI", wprodi);

    let (t, d, mk) = (
        db.table("TJADKUL").unwrap(),
        db.table("TDOSFAK").unwrap(),
        db.table("MTBMTKL").unwrap(),
    );
    let mut wjadkul = Tally::new();
    for r in t.rows() {
        let dr = d
            .rows()
            .iter()
            .find(|x| get(d, x, "kd_dosen") == get(t, r, "kd_dosen"))
            .unwrap();
        let fr = f
            .rows()
            .iter()
            .find(|x| get(f, x, "kd_fakultas") == get(d, dr, "kd_fakultas"))
            .unwrap();
        let mr = mk
            .rows()
            .iter()
            .find(|x| get(mk, x, "kd_mtk") == get(t, r, "kd_mtk"))
            .unwrap();
        let row = vec![
            get(t, r, "tahun_ajaran"),
            get(t, r, "semester"),
            get(t, r, "kd_dosen"),
            get(d, dr, "nm_dosen"),
            get(f, fr, "singkatan_fakultas"),
            get(t, r, "kd_mtk"),
            get(mk, mr, "nm_singkat_mtk"),
            get(mk, mr, "sks"),
            get(mk, mr, "nm_pembina"),
            get(t, r, "kelas"),
        ];
        wjadkul.insert(row, 1);
    }
    out.insert("WJADKUL", wjadkul);
    out
}

/// Converts staged rows into the oracle's shape; `measure` is the position
/// of the count column, if any.
pub fn tally_of(rows: &[Row], measure: Option<usize>) -> Tally {
    rows.iter()
        .map(|r| {
            let cells = r
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != measure)
                .map(|(_, v)| match v {
                    Value::Int(n) => n.to_string(),
                    Value::Text(s) => s.clone(),
                    other => format!("{other:?}"),
                })
                .collect();
            (cells, measure.map_or(1, |i| r[i].as_int().unwrap()))
        })
        .collect()
}

/// Checks no-delete, single-open and interval ordering against the
/// previous warehouse state.
pub fn check_history(wh: &Warehouse, previous: &HashMap<String, usize>) {
    for t in wh.db().tables() {
        assert!(
            t.len() >= previous.get(t.name()).copied().unwrap_or(0),
            "{} shrank",
            t.name()
        );
        let s = t.schema();
        let (mula, akhir) = (s.field_index(TGLMULA).unwrap(), s.field_index(TGLAKHIR).unwrap());
        let key = s.key_indices();
        let mut by_key: HashMap<Row, Vec<(NaiveDate, NaiveDate)>> = HashMap::new();
        for r in t.rows() {
            let k = key.iter().map(|&i| r[i].clone()).collect();
            by_key
                .entry(k)
                .or_default()
                .push((r[mula].as_date().unwrap(), r[akhir].as_date().unwrap()));
        }
        for (k, spans) in by_key {
            let open = spans.iter().filter(|s| s.1 == open_date()).count();
            assert!(open <= 1, "{} {k:?} has {open} open rows", t.name());
            for s in &spans {
                assert!(s.0 < s.1, "{} {k:?} empty span", t.name());
            }
            for w in spans.windows(2) {
                assert!(w[0].1 <= w[1].0, "{} {k:?} overlapping {w:?}", t.name());
            }
        }
    }
}

pub fn sizes(wh: &Warehouse) -> HashMap<String, usize> {
    wh.db()
        .tables()
        .iter()
        .map(|t| (t.name().to_string(), t.len()))
        .collect()
}
