mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use campusdw::campus::{build_oltp_schema, evolve, generate_snapshot, GenConfig, Snapshot};
use campusdw::etl::{
    constructive_merge, current_view, extract_transform, open_date, run_etl, EtlError, EtlMode, Warehouse,
};
use campusdw::relational::{define_table, table_stats, Database, FieldSpec, Row, Table, Value};
use campusdw::star::{campus_warehouse, validity_fields};
use chrono::{Days, NaiveDate};
use proptest::prelude::*;

fn paper() -> &'static Snapshot {
    static SNAP: OnceLock<Snapshot> = OnceLock::new();
    SNAP.get_or_init(|| generate_snapshot(&GenConfig::paper(2010)).unwrap())
}

fn desk(seed: u64) -> Snapshot {
    generate_snapshot(&GenConfig::desk(seed)).unwrap()
}

fn later(s: &Snapshot, seed: u64, changes: usize) -> Snapshot {
    evolve(s, seed, changes, s.taken_on.checked_add_days(Days::new(30)).unwrap()).unwrap()
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn count_pos(table: &str) -> Option<usize> {
    let schema = campus_warehouse();
    schema.table(table).unwrap().field_index("jumlah")
}

#[test]
fn toy_students_collapse_into_one_cell() {
    let mut db = Database::from_schemas(build_oltp_schema().tables);
    db.insert(
        "MJENJANG",
        vec!["50".into(), "S1".into(), "Strata Satu".into(), "".into()],
    )
    .unwrap();
    db.insert("MFAKULTAS", vec!["01".into(), "FT".into(), "Teknik".into(), "".into()])
        .unwrap();
    db.insert(
        "MPRODI",
        vec![
            "50101".into(),
            "01".into(),
            "50".into(),
            "TI".into(),
            "Teknik Informatika".into(),
            "".into(),
        ],
    )
    .unwrap();
    for nim in ["0750100001", "0750100002", "0750100003"] {
        db.insert(
            "MMAHASISWA",
            vec![
                nim.into(),
                "Mhs".into(),
                "W".into(),
                Value::Int(2007),
                "50101".into(),
                "".into(),
            ],
        )
        .unwrap();
    }
    let staged = extract_transform(&db, &campus_warehouse()).unwrap();
    assert_eq!(
        staged["WDATA1"],
        vec![vec!["50101".into(), "W".into(), Value::Int(2007), Value::Int(3)]]
    );
    assert_eq!(staged["WPRODI"].len(), 1);
    assert!(staged["WAKTIF"].is_empty() && staged["WJADKUL"].is_empty());
}

#[test]
fn referential_gap_is_an_error() {
    let mut trkrs_orphan = desk(3).db;
    trkrs_orphan.table_mut("MMAHASISWA").unwrap().delete_where(|_| true);
    assert!(matches!(
        extract_transform(&trkrs_orphan, &campus_warehouse()),
        Err(EtlError::Referential(_))
    ));
}

#[test]
fn paper_scale_staging_hits_published_counts() {
    let staged = extract_transform(&paper().db, &campus_warehouse()).unwrap();
    let counts: BTreeMap<&str, usize> = staged.iter().map(|(k, v)| (k.as_str(), v.len())).collect();
    let expected = [
        ("WPRODI", 16),
        ("WJADKUL", 303),
        ("WGRADE", 368),
        ("WDATA1", 279),
        ("WAKTIF", 74),
        ("WIPS", 98),
    ];
    for (table, n) in expected {
        assert_eq!(counts[table], n, "{table}");
    }
}

#[test]
fn paper_scale_first_load_has_published_lengths() {
    let mut wh = Warehouse::campus();
    let report = run_etl(None, paper(), &mut wh).unwrap();
    assert_eq!(report.mode, EtlMode::Full);
    for (table, len) in [
        ("WPRODI", 35),
        ("WJADKUL", 127),
        ("WGRADE", 44),
        ("WDATA1", 34),
        ("WAKTIF", 43),
        ("WIPS", 43),
    ] {
        let stats = table_stats(wh.table(table).unwrap());
        assert_eq!(stats.record_length, len, "{table}");
        assert_eq!(report.table(table).unwrap().stats.closed, 0);
    }
}

#[test]
fn staging_matches_brute_force_tally() {
    for seed in [11, 12, 13] {
        let config = GenConfig {
            n_students: 200,
            n_krs: 1_200,
            ..GenConfig::desk(seed)
        };
        let db = generate_snapshot(&config).unwrap().db;
        let staged = extract_transform(&db, &campus_warehouse()).unwrap();
        let oracle = common::brute_force(&db);
        for (table, expected) in &oracle {
            let got = common::tally_of(&staged[*table], count_pos(table));
            assert_eq!(&got, expected, "seed {seed} {table}");
        }
    }
}

fn fact_sum(rows: &[Row], table: &str) -> i64 {
    let i = count_pos(table).unwrap();
    rows.iter().map(|r| r[i].as_int().unwrap()).sum()
}

#[test]
fn aggregate_conservation() {
    let snap = desk(5);
    let mut wh = Warehouse::campus();
    run_etl(None, &snap, &mut wh).unwrap();
    let view = |t: &str| current_view(wh.table(t).unwrap(), snap.taken_on).unwrap();
    let db = &snap.db;
    assert_eq!(
        fact_sum(&view("WDATA1"), "WDATA1"),
        db.table("MMAHASISWA").unwrap().len() as i64
    );
    assert_eq!(
        fact_sum(&view("WGRADE"), "WGRADE"),
        db.table("TRKRS").unwrap().len() as i64
    );
    let oracle = common::brute_force(db);
    assert_eq!(fact_sum(&view("WIPS"), "WIPS"), oracle["WIPS"].values().sum::<i64>());
}

#[test]
fn reloading_the_same_snapshot_changes_nothing() {
    let snap = desk(6);
    let mut full = Warehouse::campus();
    run_etl(None, &snap, &mut full).unwrap();
    let mut incremental = full.clone();
    let again = run_etl(None, &snap, &mut full).unwrap();
    let diff = run_etl(Some(&snap), &snap, &mut incremental).unwrap();
    for report in [&again, &diff] {
        for t in &report.tables {
            assert_eq!((t.stats.inserted, t.stats.closed), (0, 0), "{}", t.table);
        }
    }
    assert!(diff.tables.iter().all(|t| t.changed_keys == Some(0)));
    assert_eq!(full.to_bytes().unwrap(), incremental.to_bytes().unwrap());
}

#[test]
fn one_new_student_touches_one_cell() {
    let old = desk(8);
    let mut db = old.db.clone();
    let template = db.table("MMAHASISWA").unwrap().rows()[0].clone();
    let mut row = template.clone();
    row[0] = "0999999999".into();
    db.insert("MMAHASISWA", row).unwrap();
    let new = Snapshot::new(db, old.config_hash.clone(), date(2010, 3, 1));

    let mut wh = Warehouse::campus();
    run_etl(None, &old, &mut wh).unwrap();
    let before = current_view(wh.table("WDATA1").unwrap(), old.taken_on).unwrap();
    let report = run_etl(Some(&old), &new, &mut wh).unwrap();
    for t in &report.tables {
        let expected = usize::from(t.table == "WDATA1");
        assert_eq!(t.changed_keys, Some(expected), "{}", t.table);
    }
    let cell = &report.table("WDATA1").unwrap().stats;
    assert_eq!(cell.inserted, 1);
    let after = current_view(wh.table("WDATA1").unwrap(), new.taken_on).unwrap();
    assert_eq!(fact_sum(&after, "WDATA1"), fact_sum(&before, "WDATA1") + 1);
}

#[test]
fn history_keeps_the_earlier_count() {
    let mut fields = vec![FieldSpec::text("kd_prodi", 5), FieldSpec::integer("jumlah", 4)];
    fields.extend(validity_fields());
    let mut t = Table::new(define_table("WX", fields, &["kd_prodi"]).unwrap().historized());
    let cell = |n| vec![vec![Value::text("50101"), Value::Int(n)]];
    let (d1, d2) = (date(2010, 1, 1), date(2010, 2, 1));
    constructive_merge(&mut t, &cell(10), d1, None).unwrap();
    let s = constructive_merge(&mut t, &cell(12), d2, None).unwrap();
    assert_eq!((s.inserted, s.closed), (1, 1));
    // Replay: the as-of view on each load date equals what that load staged.
    assert_eq!(current_view(&t, d1).unwrap()[0][..2], cell(10)[0][..]);
    assert_eq!(current_view(&t, date(2010, 1, 31)).unwrap()[0][1], Value::Int(10));
    assert_eq!(current_view(&t, d2).unwrap()[0][..2], cell(12)[0][..]);
    assert!(current_view(&t, date(2009, 12, 31)).unwrap().is_empty());
    assert_eq!(t.rows()[0][3], Value::Date(d2));
    assert_eq!(t.rows()[1][3], Value::Date(open_date()));
}

#[test]
fn incremental_load_requires_the_last_loaded_snapshot() {
    let (a, b) = (desk(1), desk(2));
    let mut wh = Warehouse::campus();
    assert!(matches!(
        run_etl(Some(&a), &a, &mut wh),
        Err(EtlError::IncompatibleSnapshots(_))
    ));
    run_etl(None, &a, &mut wh).unwrap();
    let before = wh.to_bytes().unwrap();
    assert!(matches!(
        run_etl(Some(&b), &a, &mut wh),
        Err(EtlError::IncompatibleSnapshots(_))
    ));
    let backdated = Snapshot::new(a.db.clone(), a.config_hash.clone(), date(2000, 1, 1));
    assert!(run_etl(None, &backdated, &mut wh).is_err());
    assert_eq!(wh.to_bytes().unwrap(), before);
}

#[test]
fn warehouse_save_and_open_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let empty = Warehouse::open(dir.path()).unwrap();
    assert!(empty.last_source().is_none());
    let mut wh = Warehouse::campus();
    run_etl(None, &desk(4), &mut wh).unwrap();
    wh.save(dir.path()).unwrap();
    let back = Warehouse::open(dir.path()).unwrap();
    assert_eq!(back.to_bytes().unwrap(), wh.to_bytes().unwrap());
    assert_eq!(back.last_source(), wh.last_source());
}

#[test]
fn report_renders_text_and_json() {
    let mut wh = Warehouse::campus();
    let report = run_etl(None, &desk(9), &mut wh).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["mode"], "full");
    assert_eq!(json["tables"].as_array().unwrap().len(), 6);
    let text = report.to_text();
    assert!(text.contains("WJADKUL") && text.contains("full restage"));
}

#[test]
fn diff_driven_equals_full_restage_over_sequences() {
    for seed in 0..20u64 {
        let s0 = desk(seed);
        let s1 = later(&s0, seed * 7 + 1, 25);
        let s2 = later(&s1, seed * 7 + 2, 25);
        let mut diff = Warehouse::campus();
        let mut full = Warehouse::campus();
        let mut prev = common::sizes(&diff);
        for (old, new) in [(None, &s0), (Some(&s0), &s1), (Some(&s1), &s2)] {
            run_etl(old, new, &mut diff).unwrap();
            run_etl(None, new, &mut full).unwrap();
            common::check_history(&diff, &prev);
            prev = common::sizes(&diff);
        }
        assert_eq!(diff.to_bytes().unwrap(), full.to_bytes().unwrap(), "seed {seed}");
        // Replay: each as-of view equals the staging of the snapshot loaded then.
        for snap in [&s0, &s1, &s2] {
            let staged = extract_transform(&snap.db, diff.schema()).unwrap();
            for (table, rows) in staged {
                let view: Vec<Row> = current_view(diff.table(&table).unwrap(), snap.taken_on)
                    .unwrap()
                    .into_iter()
                    .map(|mut r| {
                        r.truncate(r.len() - 2);
                        r
                    })
                    .collect();
                let mut view = view;
                view.sort();
                let mut rows = rows;
                rows.sort();
                assert_eq!(view, rows, "seed {seed} {table} at {}", snap.taken_on);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn diff_vs_full_current_views_agree(seed in 0u64..1_000, changes in 1usize..60) {
        let s0 = desk(seed);
        let s1 = later(&s0, seed ^ 0x5eed, changes);
        let mut diff = Warehouse::campus();
        run_etl(None, &s0, &mut diff).unwrap();
        let mut full = diff.clone();
        run_etl(Some(&s0), &s1, &mut diff).unwrap();
        run_etl(None, &s1, &mut full).unwrap();
        for t in diff.db().tables() {
            prop_assert_eq!(
                current_view(t, s1.taken_on).unwrap(),
                current_view(full.table(t.name()).unwrap(), s1.taken_on).unwrap()
            );
        }
    }
}
