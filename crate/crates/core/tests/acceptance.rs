//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use campusdw::bench::{
    capacity_report, comparison_report, efficiency_pct, run_benchmark, BenchOutcome, Parameter, PUBLISHED_DW,
    PUBLISHED_OLTP,
};
use campusdw::campus::{evolve, generate_snapshot, GenConfig, Snapshot};
use campusdw::etl::{classify_ips, current_view, run_etl, IpsCategory, Warehouse};
use campusdw::reports::{assert_equivalent, run_report, Backend, ReportResult, REPORT_IDS};
use campusdw::star::{campus_warehouse, TGLAKHIR, TGLMULA};
use chrono::Days;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 0.005
}

struct PaperRun {
    snap: Snapshot,
    generation: Duration,
    bench: BenchOutcome,
}

fn paper() -> &'static PaperRun {
    static RUN: OnceLock<PaperRun> = OnceLock::new();
    RUN.get_or_init(paper_run)
}

fn paper_run() -> PaperRun {
    let start = Instant::now();
    let snap = generate_snapshot(&GenConfig::paper(2010)).expect("paper-scale generation");
    let generation = start.elapsed();
    let bench = run_benchmark(&snap, 3).expect("benchmark");
    PaperRun {
        snap,
        generation,
        bench,
    }
}

fn operational_capacity(run: &PaperRun) -> Check {
    let expected = [
        ("MMAHASISWA", 586, 42_977, 25_184_522),
        ("MPRODI", 48, 16, 768),
        ("MFAKULTAS", 65, 7, 455),
        ("MJENJANG", 24, 3, 72),
        ("TRKRS", 68, 84_774, 5_764_632),
        ("TJADKUL", 88, 1_988, 174_944),
        ("TDOSFAK", 73, 386, 28_178),
        ("MTBMTKL", 147, 1_020, 149_940),
    ];
    let cap = capacity_report("OLTP", &run.snap.db);
    let got: Vec<(&str, u64, u64, u64)> = cap
        .rows
        .iter()
        .map(|r| (r.table.as_str(), r.record_length, r.record_count, r.total_bytes))
        .collect();
    ensure(got == expected, || format!("rows {got:?}"))?;
    let t = &cap.totals;
    ensure(
        (t.record_length, t.record_count, t.total_bytes) == (1_099, 131_171, 31_303_511),
        || format!("totals {t:?}"),
    )?;
    ensure(run.generation < Duration::from_secs(60), || {
        format!("generation took {:?}", run.generation)
    })?;
    Ok(format!(
        "8 tables, 1099/131171/31303511, generated in {:.1?}",
        run.generation
    ))
}

fn warehouse_fixture() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/paper_warehouse");
    let wh = Warehouse::open(&dir).map_err(|e| e.to_string())?;
    let cap = capacity_report("Warehouse", wh.db());
    let got: Vec<(&str, u64, u64)> = cap
        .rows
        .iter()
        .map(|r| (r.table.as_str(), r.record_length, r.record_count))
        .collect();
    let expected = [
        ("WPRODI", 35, 16),
        ("WDATA1", 34, 279),
        ("WAKTIF", 43, 74),
        ("WIPS", 43, 98),
        ("WGRADE", 44, 368),
        ("WJADKUL", 127, 303),
    ];
    ensure(got == expected, || format!("rows {got:?}"))?;
    // Column sum of length times count over the rows above.
    let oracle: u64 = expected.iter().map(|(_, l, c)| l * c).sum();
    ensure(oracle == 72_115 && cap.totals.total_bytes == oracle, || {
        format!("byte total {}", cap.totals.total_bytes)
    })?;
    ensure(cap.notes.iter().any(|n| n.contains("71555")), || {
        "missing note on 71555".into()
    })?;
    // The fixture is what a fresh load of the same snapshot produces.
    let mut fresh = Warehouse::campus();
    let snap = generate_snapshot(&GenConfig::paper(2010)).map_err(|e| e.to_string())?;
    run_etl(None, &snap, &mut fresh).map_err(|e| e.to_string())?;
    ensure(fresh.to_bytes().unwrap() == wh.to_bytes().unwrap(), || {
        "fixture is stale".into()
    })?;
    Ok("6 tables, 1138 records, 72115 bytes (71555 footnoted)".into())
}

fn capacity_efficiency() -> Check {
    let cells = [
        (1_099.0, 326.0, 237.12),
        (131_171.0, 1_138.0, 11_426.45),
        (31_303_511.0, 71_555.0, 43_647.48),
    ];
    for (old, new, expected) in cells {
        let got = efficiency_pct(old, new).map_err(|e| e.to_string())?;
        ensure(close(got, expected), || format!("({old}, {new}) gave {got}"))?;
    }
    Ok("237.12, 11426.45, 43647.48".into())
}

fn report_efficiency(run: &PaperRun) -> Check {
    let lengths = [
        (723.0, 69.0),
        (791.0, 78.0),
        (205.0, 78.0),
        (791.0, 79.0),
        (373.0, 127.0),
    ];
    let tables = [(4.0, 2.0), (5.0, 2.0), (4.0, 2.0), (5.0, 2.0), (4.0, 1.0)];
    for (i, r) in run.bench.efficiency.reports.iter().enumerate() {
        let l = r.cell(Parameter::RecordLength);
        ensure((l.oltp, l.dw) == lengths[i], || {
            format!("report {} lengths {l:?}", r.report_id)
        })?;
        let t = r.cell(Parameter::TablesUsed);
        ensure((t.oltp, t.dw) == tables[i], || {
            format!("report {} tables {t:?}", r.report_id)
        })?;
    }
    let printed = [
        [250_605.31, 14_477.63, 947.83, 100.00, 31_200.00, 0.00],
        [808_428.35, 130_023.33, 914.10, 150.00, 2_456_000.00, 0.00],
        [105_484.60, 64_929.82, 162.82, 100.00, 4_396_700.00, 3_054.08],
        [180_327.00, 30_397.66, 901.27, 150.00, 5_008_200.00, 0.00],
        [814.80, 1_016.83, 193.70, 300.00, 1_191_400.00, 95.38],
    ];
    let published = comparison_report(&PUBLISHED_OLTP, &PUBLISHED_DW).map_err(|e| e.to_string())?;
    for (r, row) in published.reports.iter().zip(printed) {
        for (p, expected) in Parameter::ALL.into_iter().zip(row) {
            let got = r.cell(p).efficiency_pct;
            ensure(got.is_some_and(|g| close(g, expected)), || {
                format!("report {} {}: {got:?} vs {expected}", r.report_id, p.key())
            })?;
        }
    }
    Ok("lengths and table counts measured, 30 published cells reproduced".into())
}

fn star_derivation() -> Check {
    let w = campus_warehouse();
    let names: Vec<&str> = w.tables().iter().map(|t| t.name.as_str()).collect();
    ensure(
        names == ["WPRODI", "WDATA1", "WAKTIF", "WIPS", "WGRADE", "WJADKUL"],
        || format!("tables {names:?}"),
    )?;
    ensure(w.shared_dims.len() == 1 && w.dim_users("WPRODI").len() == 4, || {
        "WPRODI not shared".into()
    })?;
    let splits: Vec<(usize, usize)> = w.facts.iter().map(|s| (1, s.dims.len())).collect();
    ensure(splits == [(1, 1), (1, 1), (1, 1), (1, 1), (1, 0)], || {
        format!("splits {splits:?}")
    })?;
    for t in w.tables() {
        let n = t.fields.len();
        ensure(
            t.fields[n - 2].name == TGLMULA && t.fields[n - 1].name == TGLAKHIR,
            || format!("{} lacks trailing validity dates", t.name),
        )?;
    }
    Ok("6 tables, WPRODI shared by 4 facts, splits 1+1 x4 and 1+0".into())
}

/// Drops the program attributes implied by kd_prodi, leaving the fact grain.
fn to_tally(r: &ReportResult) -> common::Tally {
    let cols = r.columns();
    let implied = ["nm_jenjang", "singkatan_fakultas", "singkatan_prodi", "jumlah"];
    let keep: Vec<usize> = (0..cols.len())
        .filter(|&i| !implied.contains(&cols[i].as_str()))
        .collect();
    let m = cols.iter().position(|c| c == "jumlah").expect("measure column");
    r.rows
        .rows()
        .iter()
        .map(|row| {
            (
                keep.iter().map(|&i| row[i].to_string()).collect(),
                row[m].as_int().unwrap(),
            )
        })
        .collect()
}

fn backend_equivalence() -> Check {
    let start = Instant::now();
    let facts = [(1, "WDATA1"), (2, "WAKTIF"), (3, "WIPS"), (4, "WGRADE")];
    for seed in 1000..1020u64 {
        let snap = generate_snapshot(&GenConfig::desk(seed)).map_err(|e| e.to_string())?;
        let mut wh = Warehouse::campus();
        run_etl(None, &snap, &mut wh).map_err(|e| e.to_string())?;
        let oracle = common::brute_force(&snap.db);
        for id in REPORT_IDS {
            let o = run_report(id, Backend::Oltp, &snap.db, snap.taken_on).map_err(|e| e.to_string())?;
            let d = run_report(id, Backend::Warehouse, wh.db(), snap.taken_on).map_err(|e| e.to_string())?;
            let eq = assert_equivalent(&o, &d);
            ensure(eq.equivalent, || format!("seed {seed}: {eq}"))?;
            if let Some((_, fact)) = facts.iter().find(|(i, _)| *i == id) {
                ensure(to_tally(&o) == oracle[fact], || {
                    format!("seed {seed} report {id} differs from oracle")
                })?;
            } else {
                let listed: BTreeSet<Vec<String>> = o
                    .rows
                    .rows()
                    .iter()
                    .map(|r| r.iter().map(|v| v.to_string()).collect())
                    .collect();
                let expected: BTreeSet<Vec<String>> = oracle["WJADKUL"].keys().cloned().collect();
                ensure(listed == expected, || {
                    format!("seed {seed} schedule differs from oracle")
                })?;
            }
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!(
        "20 seeds x 5 reports agree with each other and the oracle in {took:.1?}"
    ))
}

fn constructive_merge() -> Check {
    for seed in 0..20u64 {
        let s0 = generate_snapshot(&GenConfig::desk(seed)).map_err(|e| e.to_string())?;
        let step = |s: &Snapshot, k: u64| {
            evolve(
                s,
                seed * 31 + k,
                30,
                s.taken_on.checked_add_days(Days::new(60)).unwrap(),
            )
        };
        let s1 = step(&s0, 1).map_err(|e| e.to_string())?;
        let s2 = step(&s1, 2).map_err(|e| e.to_string())?;
        let (mut diff, mut full) = (Warehouse::campus(), Warehouse::campus());
        let mut prev = common::sizes(&diff);
        for (old, new) in [(None, &s0), (Some(&s0), &s1), (Some(&s1), &s2)] {
            run_etl(old, new, &mut diff).map_err(|e| e.to_string())?;
            run_etl(None, new, &mut full).map_err(|e| e.to_string())?;
            // Panics on a deleted row, a second open row or overlapping spans.
            common::check_history(&diff, &prev);
            prev = common::sizes(&diff);
        }
        ensure(diff.to_bytes().unwrap() == full.to_bytes().unwrap(), || {
            format!("seed {seed}: diff-driven and full restage differ")
        })?;
        let again = run_etl(Some(&s2), &s2, &mut diff).map_err(|e| e.to_string())?;
        let inserted: u64 = again.tables.iter().map(|t| t.stats.inserted).sum();
        ensure(inserted == 0, || format!("seed {seed}: rerun inserted {inserted}"))?;
        for snap in [&s0, &s1, &s2] {
            let oracle = common::brute_force(&snap.db);
            for (table, expected) in &oracle {
                let t = diff.table(table).unwrap();
                let measure = t.schema().field_index("jumlah");
                let view: Vec<_> = current_view(t, snap.taken_on)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|mut r| {
                        r.truncate(r.len() - 2);
                        r
                    })
                    .collect();
                ensure(&common::tally_of(&view, measure) == expected, || {
                    format!("seed {seed} {table} as of {} differs from oracle", snap.taken_on)
                })?;
            }
        }
    }
    Ok("20 seeds x 3 snapshots: history kept, diff = full, rerun inert, as-of views match oracle".into())
}

fn directional_performance(run: &PaperRun) -> Check {
    for r in &run.bench.efficiency.reports {
        let t = r.cell(Parameter::WallTime);
        ensure(t.dw < t.oltp, || {
            format!("report {} wall time {} vs {}", r.report_id, t.dw, t.oltp)
        })?;
        let b = r.cell(Parameter::TotalBytes);
        ensure(b.dw < b.oltp, || {
            format!("report {} bytes {} vs {}", r.report_id, b.dw, b.oltp)
        })?;
    }
    ensure(run.bench.all_equivalent(), || "paper-scale reports differ".into())?;
    Ok("warehouse faster and smaller on all 5 reports".into())
}

fn ips_boundaries() -> Check {
    let cases = [
        (2.49, IpsCategory::K),
        (2.50, IpsCategory::C),
        (3.00, IpsCategory::C),
        (3.01, IpsCategory::B),
    ];
    for (ips, expected) in cases {
        let got = classify_ips(ips).map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("{ips} gave {got}"))?;
    }
    Ok("2.49 K, 2.50 C, 3.00 C, 3.01 B".into())
}

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let mut results: Vec<(&str, Check)> = Vec::new();
    let mut record = |name, f: &mut dyn FnMut() -> Check| {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:<32} {status}  {detail}", name);
        results.push((name, outcome));
    };
    record("1 OLTP capacity golden", &mut || operational_capacity(paper()));
    record("2 warehouse fixture golden", &mut warehouse_fixture);
    record("3 capacity efficiency golden", &mut capacity_efficiency);
    record("4 per-report efficiency golden", &mut || report_efficiency(paper()));
    record("5 star derivation golden", &mut star_derivation);
    record("6 backend equivalence", &mut backend_equivalence);
    record("7 constructive merge", &mut constructive_merge);
    record("8 directional performance", &mut || directional_performance(paper()));
    record("9 IPS category boundaries", &mut ips_boundaries);
    let failed = results.iter().filter(|(_, r)| r.is_err()).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
