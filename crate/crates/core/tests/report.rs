mod common;

use common::fixture;
use n1screen::report::{
    read_csv, read_json, write_csv, write_json, CsvRow, ScreeningReport, CSV_HEADER,
    JSON_VIOLATION_CAP,
};
use n1screen::{prepare_base, screen_all, ScreenOptions};

fn sweep(name: &str, tweak: impl Fn(&mut n1screen::ingest::NetworkModel)) -> ScreeningReport {
    let mut model = fixture(name);
    tweak(&mut model);
    let opts = ScreenOptions::default();
    let ctx = prepare_base(&model, &opts).unwrap();
    screen_all(&ctx, &opts, 2).unwrap()
}

fn csv_text(r: &ScreeningReport) -> String {
    let mut buf = Vec::new();
    let n = write_csv(r, &mut buf).unwrap();
    assert_eq!(n, buf.len());
    String::from_utf8(buf).unwrap()
}

fn json_text(r: &ScreeningReport) -> String {
    let mut buf = Vec::new();
    let n = write_json(r, &mut buf).unwrap();
    assert_eq!(n, buf.len());
    String::from_utf8(buf).unwrap()
}

#[test]
fn empty_report_is_header_only() {
    let opts = ScreenOptions {
        filter: Some(vec![]),
        ..Default::default()
    };
    let ctx = prepare_base(&fixture("ieee14"), &opts).unwrap();
    let r = screen_all(&ctx, &opts, 1).unwrap();
    assert_eq!(csv_text(&r), format!("{}\n", CSV_HEADER.join(",")));
    let back = read_json(json_text(&r).as_bytes()).unwrap();
    assert!(back.scenarios.is_empty());
    assert_eq!(back.totals.tested, 0);
    assert_eq!(back.totals.converged, 0);
}

#[test]
fn csv_round_trip_on_ieee118() {
    let r = sweep("ieee118", |_| {});
    let text = csv_text(&r);
    assert!(text.starts_with("branch_id,from_bus,to_bus,islanding,converged,outer_iters,cg_iters,time_ms,worst_violation_pct,violation_count,failure_reason\n"));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 186);
    for (row, s) in rows.iter().zip(&r.scenarios) {
        assert_eq!(*row, CsvRow::of(s));
    }
}

#[test]
fn json_round_trip_on_ieee118() {
    let r = sweep("ieee118", |_| {});
    let back = read_json(json_text(&r).as_bytes()).unwrap();
    assert_eq!(back, r);
    assert!(json_text(&r).ends_with("}\n"));
}

#[test]
fn json_caps_violation_lists() {
    let r = sweep("ieee118", |m| {
        for b in &mut m.branches {
            b.rating_mva = 1.0;
        }
    });
    let full = r
        .scenarios
        .iter()
        .find(|s| s.violation_count > JSON_VIOLATION_CAP)
        .unwrap();
    let back = read_json(json_text(&r).as_bytes()).unwrap();
    let capped = back
        .scenarios
        .iter()
        .find(|s| s.branch_id == full.branch_id)
        .unwrap();
    assert_eq!(capped.violations.len(), JSON_VIOLATION_CAP);
    assert_eq!(capped.violation_count, full.violation_count);
    assert_eq!(
        capped.violations_overflow,
        full.violation_count - JSON_VIOLATION_CAP
    );
    assert_eq!(capped.violations[..], full.violations[..JSON_VIOLATION_CAP]);
    assert_eq!(capped.worst_violation_pct(), full.worst_violation_pct());
}

#[test]
fn csv_and_json_agree() {
    let r = sweep("ieee14", |m| {
        for b in &mut m.branches {
            b.rating_mva = 50.0;
        }
    });
    assert!(r.scenarios.iter().any(|s| s.violation_count > 0));
    let rows = read_csv(csv_text(&r).as_bytes()).unwrap();
    let back = read_json(json_text(&r).as_bytes()).unwrap();
    for (row, s) in rows.iter().zip(&back.scenarios) {
        assert_eq!(row.branch_id, s.branch_id);
        assert_eq!(row.converged, s.converged);
        assert_eq!(row.violation_count, s.violation_count);
        assert_eq!(row.cg_iters, s.cg_iterations_total);
        match (row.worst_violation_pct, s.worst_violation_pct()) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 0.05 + 1e-9),
            (a, b) => assert_eq!(a.is_none(), b.is_none()),
        }
    }
}

#[test]
fn zeroed_times_are_byte_identical() {
    let mut a = sweep("ieee14", |_| {});
    let mut b = sweep("ieee14", |_| {});
    a.zero_times();
    b.zero_times();
    assert_eq!(csv_text(&a), csv_text(&b));
    assert_eq!(json_text(&a), json_text(&b));
    assert!(a.summary_line().ends_with("total_ms=0.00"));
}

#[test]
fn summary_line_counts() {
    let r = sweep("ieee118", |_| {});
    let line = r.summary_line();
    assert!(
        line.starts_with("tested=186 converged=186 islanding=9 failed=0 total_ms="),
        "{line}"
    );
}
