use dshi_core::dshi::{analytic_psd, DshiParams};
use dshi_core::estimate::{estimate_voigt, VoigtOptions};
use dshi_core::grid::FrequencyGrid;
use dshi_core::io::*;
use dshi_core::trace::{PowerUnit, SpectrumTrace};
use dshi_core::Error;
use proptest::prelude::*;
use serde_json::json;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_csv_roundtrip(
        start in 0.0f64..1e7,
        step in 1e-3f64..1e4,
        vals in prop::collection::vec(-160.0f64..20.0, 2..200),
        rbw in 0.0f64..1e5,
    ) {
        let grid = FrequencyGrid::new(start, step, vals.len()).unwrap();
        let file = TraceFile {
            trace: SpectrumTrace::new(grid, vals, PowerUnit::DbmPerRbw, rbw).unwrap(),
            instrument: Some("ESA".into()),
            timestamp: None,
        };
        let back = parse_trace(&format_trace(&file).unwrap()).unwrap();
        prop_assert_eq!(back, file);
    }
}

#[test]
fn files_roundtrip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let p = DshiParams::reference();
    let grid = FrequencyGrid::centered(7.0e6, 25.0, 2000).unwrap();
    let t = analytic_psd(&p, &grid).unwrap();
    let path = dir.path().join("trace.csv");
    write_trace(&t, &path).unwrap();
    assert_eq!(read_trace(&path).unwrap(), t);

    let mut report = AnalysisReport::new(
        InputDescriptor { source: "synthetic".into(), params: serde_json::to_value(p).unwrap() },
        "voigt",
        json!({ "tol": 1e-3 }),
    );
    report.result =
        Some(estimate_voigt(&t, &VoigtOptions { carrier_hz: Some(7.0e6), ..VoigtOptions::default() }).unwrap());
    report.seed = Some(3);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    write_report(&report, &a).unwrap();
    write_report(&report, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_report(&a).unwrap(), report);
}

#[test]
fn report_keys_are_sorted() {
    let r = AnalysisReport {
        error: Some("x".into()),
        ..AnalysisReport::new(
            InputDescriptor { source: "s".into(), params: json!({ "z": 1, "a": 2 }) },
            "envelope",
            json!({}),
        )
    };
    let text = format_report(&r).unwrap();
    let keys: Vec<&str> =
        text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim().split('"').nth(1).unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(text.find("\"a\"").unwrap() < text.find("\"z\"").unwrap());
}

#[test]
fn malformed_traces_are_rejected() {
    assert!(matches!(parse_trace("frequency_hz,psd\n1,2\n"), Err(Error::Schema(_))));
    assert!(matches!(parse_trace("frequency_hz,psd\n1,2\n1,3\n"), Err(Error::Schema(_))));
    assert!(matches!(parse_trace("frequency_hz,psd\n1,2\n2,3\n4,3\n"), Err(Error::Schema(_))));
    assert!(matches!(parse_trace("frequency_hz,psd\n1,2\n2,abc\n"), Err(Error::Parse { line: 3, .. })));
    let empty = AnalysisReport::new(InputDescriptor { source: "s".into(), params: json!(null) }, "voigt", json!({}));
    let dir = tempfile::tempdir().unwrap();
    assert!(write_report(&empty, dir.path().join("r.json")).is_err());
}
