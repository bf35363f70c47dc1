mod common;

use std::sync::OnceLock;

use campusdw::campus::{build_oltp_schema, generate_snapshot, GenConfig, Snapshot};
use campusdw::etl::{run_etl, Warehouse};
use campusdw::relational::{Database, Value};
use campusdw::reports::{
    assert_equivalent, run_report, Backend, ReportDefinition, ReportError, ReportResult, REPORT_IDS,
};

struct Loaded {
    snap: Snapshot,
    wh: Warehouse,
}

fn load(snap: Snapshot) -> Loaded {
    let mut wh = Warehouse::campus();
    run_etl(None, &snap, &mut wh).unwrap();
    Loaded { snap, wh }
}

fn paper() -> &'static Loaded {
    static P: OnceLock<Loaded> = OnceLock::new();
    P.get_or_init(|| load(generate_snapshot(&GenConfig::paper(2010)).unwrap()))
}

fn both(l: &Loaded, id: u32) -> (ReportResult, ReportResult) {
    let as_of = l.snap.taken_on;
    (
        run_report(id, Backend::Oltp, &l.snap.db, as_of).unwrap(),
        run_report(id, Backend::Warehouse, l.wh.db(), as_of).unwrap(),
    )
}

#[test]
fn paper_scale_table_counts_and_record_lengths() {
    let expected = [
        (4, 723, 2, 69),
        (5, 791, 2, 78),
        (4, 205, 2, 78),
        (5, 791, 2, 79),
        (4, 373, 1, 127),
    ];
    for (id, (ot, ol, dt, dl)) in REPORT_IDS.into_iter().zip(expected) {
        let (o, d) = both(paper(), id);
        assert_eq!(
            (o.metrics.tables_used, o.metrics.record_length_sum),
            (ot, ol),
            "report {id} oltp"
        );
        assert_eq!(
            (d.metrics.tables_used, d.metrics.record_length_sum),
            (dt, dl),
            "report {id} dw"
        );
    }
}

#[test]
fn paper_scale_reports_agree_and_warehouse_reads_less() {
    let rows = [279, 74, 98, 368, 303];
    for (id, n) in REPORT_IDS.into_iter().zip(rows) {
        let (o, d) = both(paper(), id);
        let eq = assert_equivalent(&o, &d);
        assert!(eq.equivalent, "{eq}");
        assert_eq!(o.rows.len(), n, "report {id}");
        assert_eq!(o.metrics.rows_produced, n as u64);
        assert!(d.metrics.bytes_scanned < o.metrics.bytes_scanned, "report {id}");
    }
}

#[test]
fn plan_table_sets_match_definitions() {
    let oltp = [
        vec!["MFAKULTAS", "MJENJANG", "MMAHASISWA", "MPRODI"],
        vec!["MFAKULTAS", "MJENJANG", "MMAHASISWA", "MPRODI", "TRKRS"],
        vec!["MFAKULTAS", "MJENJANG", "MPRODI", "TRKRS"],
        vec!["MFAKULTAS", "MJENJANG", "MMAHASISWA", "MPRODI", "TRKRS"],
        vec!["MFAKULTAS", "MTBMTKL", "TDOSFAK", "TJADKUL"],
    ];
    let as_of = chrono::NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
    for (def, tables) in ReportDefinition::all().iter().zip(oltp) {
        assert_eq!(def.oltp_plan.base_tables().into_iter().collect::<Vec<_>>(), tables);
        let dw = def.dw_plan(as_of);
        assert_eq!(dw.base_tables().len(), if def.id == 5 { 1 } else { 2 });
        assert!(!def.title.is_empty());
    }
}

#[test]
fn empty_database_gives_empty_reports() {
    let db = Database::from_schemas(build_oltp_schema().tables);
    let r = run_report(3, Backend::Oltp, &db, campusdw::campus::default_snapshot_date()).unwrap();
    assert!(r.rows.is_empty());
    assert_eq!(r.metrics.rows_produced, 0);
    let wh = Warehouse::campus();
    let r = run_report(
        1,
        Backend::Warehouse,
        wh.db(),
        campusdw::campus::default_snapshot_date(),
    )
    .unwrap();
    assert!(r.rows.is_empty());
}

#[test]
fn rejects_unknown_ids_and_wrong_databases() {
    let l = load(generate_snapshot(&GenConfig::desk(1)).unwrap());
    let d = l.snap.taken_on;
    assert!(matches!(
        run_report(6, Backend::Oltp, &l.snap.db, d),
        Err(ReportError::UnknownReport(6))
    ));
    assert!(matches!(
        run_report(1, Backend::Oltp, l.wh.db(), d),
        Err(ReportError::BackendMismatch { .. })
    ));
    assert!(matches!(
        run_report(1, Backend::Warehouse, &l.snap.db, d),
        Err(ReportError::BackendMismatch { .. })
    ));
    assert!("olap".parse::<Backend>().is_err());
    assert_eq!("dw".parse::<Backend>().unwrap(), Backend::Warehouse);
}

#[test]
fn stale_warehouse_is_not_equivalent() {
    let l = load(generate_snapshot(&GenConfig::desk(2)).unwrap());
    let mut db = l.snap.db.clone();
    let mut row = db.table("MMAHASISWA").unwrap().rows()[0].clone();
    row[0] = "0999999999".into();
    db.insert("MMAHASISWA", row).unwrap();
    let o = run_report(1, Backend::Oltp, &db, l.snap.taken_on).unwrap();
    let d = run_report(1, Backend::Warehouse, l.wh.db(), l.snap.taken_on).unwrap();
    let eq = assert_equivalent(&o, &d);
    assert!(!eq.equivalent);
    assert_eq!((eq.only_oltp.len(), eq.only_dw.len()), (1, 1));
    assert!(eq.to_string().contains("NOT equivalent"));
}

/// Drops the program attributes implied by kd_prodi so rows line up with
/// the oracle's fact-grain tallies.
fn to_tally(r: &ReportResult) -> common::Tally {
    let cols = r.columns();
    let keep: Vec<usize> = (0..cols.len())
        .filter(|&i| {
            !matches!(
                cols[i].as_str(),
                "nm_jenjang" | "singkatan_fakultas" | "singkatan_prodi" | "jumlah"
            )
        })
        .collect();
    let m = cols.iter().position(|c| c == "jumlah").unwrap();
    r.rows
        .rows()
        .iter()
        .map(|row| {
            let cells = keep.iter().map(|&i| row[i].to_string()).collect();
            (cells, row[m].as_int().unwrap())
        })
        .collect()
}

#[test]
fn desk_scale_equivalence_against_oracle() {
    let facts = [(1, "WDATA1"), (2, "WAKTIF"), (3, "WIPS"), (4, "WGRADE")];
    for seed in 100..120 {
        let l = load(generate_snapshot(&GenConfig::desk(seed)).unwrap());
        let oracle = common::brute_force(&l.snap.db);
        for id in REPORT_IDS {
            let (o, d) = both(&l, id);
            let eq = assert_equivalent(&o, &d);
            assert!(eq.equivalent, "seed {seed}: {eq}");
            assert!(
                d.metrics.bytes_scanned < o.metrics.bytes_scanned,
                "seed {seed} report {id}"
            );
            if let Some((_, fact)) = facts.iter().find(|(i, _)| *i == id) {
                assert_eq!(to_tally(&o), oracle[fact], "seed {seed} report {id}");
            }
        }
        let (o, _) = both(&l, 5);
        let listed: common::Tally = o
            .rows
            .rows()
            .iter()
            .map(|r| (r.iter().map(Value::to_string).collect(), 1))
            .collect();
        assert_eq!(listed, oracle["WJADKUL"], "seed {seed}");
    }
}

#[test]
fn csv_and_json_output() {
    let l = load(generate_snapshot(&GenConfig::desk(3)).unwrap());
    let (o, d) = both(&l, 1);
    let csv = o.to_csv();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, ReportDefinition::get(1).unwrap().columns().join(","));
    assert_eq!(csv.lines().count(), o.rows.len() + 1);
    assert_eq!(
        csv,
        run_report(1, Backend::Oltp, &l.snap.db, l.snap.taken_on)
            .unwrap()
            .to_csv()
    );
    let json: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
    assert_eq!(json["backend"], "dw");
    assert_eq!(json["rows"].as_array().unwrap().len(), d.rows.len());
    assert_eq!(json["metrics"]["tables_used"], 2);
}
