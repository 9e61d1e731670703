use std::path::Path;
use std::process::{Command, Output};

use dshi_core::dshi::{DshiParams, ServoBumpModel};
use dshi_core::io::read_trace;
use serde_json::Value;

fn dshi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dshi")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dshi(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analytic_trace_peaks_at_eom_with_expected_spacing() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--mode",
            "analytic",
            "--linewidth-hz",
            "100",
            "--fiber-km",
            "5",
            "--eom-mhz",
            "7",
            "--out",
            "t.csv",
        ],
    );
    let t = read_trace(dir.path().join("t.csv")).unwrap();
    let peak = (0..t.values.len()).max_by(|&a, &b| t.values[a].total_cmp(&t.values[b])).unwrap();
    assert!((t.grid.point(peak) - 7e6).abs() <= t.grid.step());
    let spacing = DshiParams::reference().extremum_spacing_hz();
    assert!((spacing - 20.42e3).abs() < 10.0);
    // first peak above its neighbouring troughs on the nu^2-compensated trace
    let at = |f: f64| {
        let i = t.grid.nearest_index(f).unwrap();
        t.values[i] * (f - 7e6).powi(2)
    };
    assert!(at(7e6 + spacing) > at(7e6 + 2.0 * spacing));
    assert!(at(7e6 + 3.0 * spacing) > at(7e6 + 2.0 * spacing));
}

#[test]
fn linewidth_sweep_contrast_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let listed = ok(
        dir.path(),
        &["simulate", "--sweep", "linewidth", "--values", "10,100,1000", "--step-hz", "5", "--out", "sw"],
    );
    assert_eq!(listed.lines().count(), 3);
    let spacing = DshiParams::reference().extremum_spacing_hz();
    let contrast: Vec<f64> = ["10", "100", "1000"]
        .iter()
        .map(|v| {
            let t = read_trace(dir.path().join(format!("sw/linewidth_hz_{v}.csv"))).unwrap();
            let at = |j: f64| t.values[t.grid.nearest_index(7e6 + j * spacing).unwrap()];
            10.0 * (at(1.0) / at(2.0)).log10()
        })
        .collect();
    assert!(contrast[0] > contrast[1] && contrast[1] > contrast[2], "{contrast:?}");
}

#[test]
fn montecarlo_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "simulate",
            "--mode",
            "montecarlo",
            "--segments",
            "16",
            "--segment-ms",
            "2",
            "--span-khz",
            "50",
            "--seed",
            "7",
            "--rin-sigma",
            "0.01",
            "--out",
            out,
        ]
    };
    ok(dir.path(), &args("a.csv"));
    ok(dir.path(), &args("b.csv"));
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn envelope_fit_reports_single_laser_width() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--linewidth-hz", "320", "--out", "t.csv"]);
    ok(
        dir.path(),
        &[
            "fit",
            "--input",
            "t.csv",
            "--method",
            "envelope",
            "--peak-order",
            "3",
            "--trough-order",
            "4",
            "--report",
            "r.json",
        ],
    );
    let r = json(&dir.path().join("r.json"));
    let single = r["result"]["single_laser_fwhm_hz"].as_f64().unwrap();
    assert!((single - 160.0).abs() < 1.0, "{single}");
    assert_eq!(r["config"]["peak_order"], 3);
    assert_eq!(r["config"]["method"], "envelope");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--linewidth-hz", "320", "--broadening-hz", "640", "--out", "t.csv"]);
    ok(dir.path(), &["fit", "--input", "t.csv", "--method", "both", "--report", "a.json", "--profile", "p.csv"]);
    ok(dir.path(), &["fit", "--input", "t.csv", "--method", "both", "--report", "b.json"]);
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    let r = json(&dir.path().join("a.json"));
    assert!(r["result"].is_object() && r["cross_check"].is_object());
    let profile = read_trace(dir.path().join("p.csv")).unwrap();
    assert_eq!(profile.grid, read_trace(dir.path().join("t.csv")).unwrap().grid);
}

#[test]
fn bumped_trace_flags_envelope() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--linewidth-hz",
            "320",
            "--bump-height-db",
            "10",
            "--bump-offset-khz",
            "50",
            "--bump-width-khz",
            "20",
            "--out",
            "b.csv",
        ],
    );
    ok(dir.path(), &["fit", "--input", "b.csv", "--method", "envelope", "--report", "r.json"]);
    let r = json(&dir.path().join("r.json"));
    let flags = r["result"]["flags"].as_array().unwrap();
    assert!(flags.iter().any(|f| f == "servo-contaminated"), "{flags:?}");
}

#[test]
fn bump_extraction_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["simulate", "--out", "model.csv"]);
    ok(dir.path(), &["simulate", "--bump-height-db", "6", "--bump-one-sided", "--out", "measured.csv"]);
    ok(dir.path(), &["bumps", "--measured", "model.csv", "--model", "model.csv", "--out", "unit.csv"]);
    ok(dir.path(), &["bumps", "--measured", "measured.csv", "--model", "model.csv", "--out", "ratio.csv"]);
    let unit = read_trace(dir.path().join("unit.csv")).unwrap();
    assert!(unit.values.iter().all(|v| *v == 1.0));
    let ratio = read_trace(dir.path().join("ratio.csv")).unwrap();
    let b = ServoBumpModel::new(50e3, 20e3, 6.0, false).unwrap();
    for (f, r) in ratio.grid.points().zip(&ratio.values) {
        assert!((r / b.multiplier(7e6, f) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn ion_spectrum_reports_fit() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        &[
            "ionsim",
            "--mode",
            "spectrum",
            "--laser-fwhm-hz",
            "156",
            "--pulse-ms",
            "4",
            "--shots",
            "50",
            "--out",
            "s.csv",
        ],
    );
    let r: Value = serde_json::from_str(&stdout).unwrap();
    assert!(r["fit"]["parameters"][1].as_f64().unwrap() > 0.0);
    assert!(r["fit"]["residual_norm"].as_f64().unwrap().is_finite());
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("detuning_hz,probability,std_error\n"));
    assert_eq!(csv.lines().count(), 122);
}

#[test]
fn pulse_sweep_gives_inverse_law() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "ionsim",
            "--mode",
            "sweep-t",
            "--pulses-ms",
            "1,2,4,8",
            "--laser-fwhm-hz",
            "0",
            "--shots",
            "1",
            "--report",
            "r.json",
            "--out",
            "t.csv",
        ],
    );
    let p = json(&dir.path().join("r.json"))["fit"]["parameters"][1].as_f64().unwrap();
    assert!((p - 1.0).abs() < 0.05, "{p}");
}

#[test]
fn rabi_frequency_recovered() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["ionsim", "--mode", "rabi", "--rabi-hz", "40000", "--shots", "100", "--report", "r.json", "--out", "r.csv"],
    );
    let omega = json(&dir.path().join("r.json"))["fit"]["parameters"][0].as_f64().unwrap();
    assert!((omega / 40e3 - 1.0).abs() < 0.01, "{omega}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "linewidth-hz = 1000.0\nspan-khz = 60.0\n").unwrap();
    ok(dir.path(), &["simulate", "--config", "c.toml", "--linewidth-hz", "100", "--out", "a.csv"]);
    ok(dir.path(), &["simulate", "--span-khz", "60", "--linewidth-hz", "100", "--out", "b.csv"]);
    ok(dir.path(), &["simulate", "--span-khz", "60", "--linewidth-hz", "1000", "--out", "c.csv"]);
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    ok(dir.path(), &["simulate", "--config", "c.toml", "--out", "d.csv"]);
    assert_eq!(read("d.csv"), read("c.csv"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| dshi(dir.path(), args).status.code().unwrap();
    assert_eq!(code(&["simulate", "--fiber-km", "0", "--out", "x.csv"]), 2);
    assert_eq!(code(&["simulate", "--nonsense"]), 2);
    std::fs::write(dir.path().join("bad.toml"), "linewidht-hz = 3\n").unwrap();
    assert_eq!(code(&["simulate", "--config", "bad.toml"]), 2);
    let out = dshi(dir.path(), &["simulate", "--fiber-index", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--fiber-index"));
    assert_eq!(code(&["fit", "--input", "missing.csv"]), 4);

    std::fs::write(dir.path().join("flat.csv"), "# unit=linear\nfrequency_hz,psd\n6.9e6,1\n7.0e6,1\n7.1e6,1\n")
        .unwrap();
    assert_eq!(
        code(&["fit", "--input", "flat.csv", "--method", "envelope", "--report", "r.json", "--fiber-km", "0.5"]),
        3
    );
    let r = json(&dir.path().join("r.json"));
    assert!(r["error"].as_str().unwrap().contains("envelope"));
}
