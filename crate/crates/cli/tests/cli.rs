// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tivacpd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tivacpd"))
        .current_dir(dir)
        .env_remove("TIVACPD_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn indices(v: &Value) -> Vec<i64> {
    v["change_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_i64().unwrap())
        .collect()
}

#[test]
fn simulate_writes_header_plus_t_rows_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    ok(&tivacpd(dir.path(), &["simulate", "jumping_mean", "--seed", "1", "-o", "a"]));
    ok(&tivacpd(dir.path(), &["simulate", "jumping_mean", "--seed", "1", "-o", "b"]));
    let csv = fs::read_to_string(dir.path().join("a/jumping_mean_1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 501);
    for name in ["jumping_mean_1.csv", "jumping_mean_1.truth.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap()
        );
    }
}

#[test]
fn two_correlation_segments_give_one_change_point() {
    let dir = tempfile::tempdir().unwrap();
    ok(&tivacpd(
        dir.path(),
        &["simulate", "changing_correlation", "--rho", "0,0.9", "-o", "d"],
    ));
    let truth = json(&dir.path().join("d/changing_correlation_0.truth.json"));
    assert_eq!(indices(&truth).len(), 1);
}

#[test]
fn unknown_family_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tivacpd(dir.path(), &["simulate", "sawtooth"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sawtooth"));
}

#[test]
fn detect_finds_jumping_mean_changes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&tivacpd(d, &["simulate", "jumping_mean", "--seed", "1", "-o", "data"]));
    let input = "data/jumping_mean_1.csv";
    ok(&tivacpd(d, &["detect", input, "--preset", "jumping_mean", "-o", "r1"]));
    ok(&tivacpd(d, &["detect", input, "--preset", "jumping_mean", "-o", "r2"]));
    for name in ["scores.csv", "cps.json", "heatmap.json"] {
        assert_eq!(
            fs::read(d.join("r1").join(name)).unwrap(),
            fs::read(d.join("r2").join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    let pred = indices(&json(&d.join("r1/cps.json")));
    let truth = indices(&json(&d.join("data/jumping_mean_1.truth.json")));
    assert!(!pred.is_empty());
    for p in &pred {
        assert!(truth.iter().any(|t| (t - p).abs() <= 5), "{p} not near {truth:?}");
    }
    let scores = fs::read_to_string(d.join("r1/scores.csv")).unwrap();
    assert_eq!(scores.lines().next(), Some("t,CovScore,DistScore,ensemble"));
    assert_eq!(scores.lines().count(), 501);

    let out = tivacpd(
        d,
        &["eval", "--cps", "r1/cps.json", "--truth", "data/jumping_mean_1.truth.json"],
    );
    ok(&out);
    let reports: Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["margin"], 5);
    assert_eq!(reports[1]["margin"], 10);
}

#[test]
fn traces_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&tivacpd(
        d,
        &["simulate", "changing_correlation", "--length", "200", "--segments", "2", "-o", "data"],
    ));
    ok(&tivacpd(
        d,
        &["detect", "data/changing_correlation_0.csv", "--traces", "-o", "r"],
    ));
    for name in ["ensemble.json", "tvgl.json", "mmd.json"] {
        assert!(d.join("r").join(name).exists(), "{name} missing");
    }
    let trace = json(&d.join("r/ensemble.json"));
    assert_eq!(trace["variants"].as_array().unwrap().len(), 4);
}

#[test]
fn perfect_predictions_score_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("p.json"), "[100, 200]").unwrap();
    fs::write(d.join("t.json"), r#"{"change_points": [100, 200]}"#).unwrap();
    let out = tivacpd(d, &["eval", "--cps", "p.json", "--truth", "t.json", "-m", "5"]);
    ok(&out);
    let reports: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    assert_eq!(reports[0]["f1"], 1.0);
}

#[test]
fn constant_feature_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("flat,wiggle\n");
    for t in 0..60 {
        csv += &format!("2.5,{}\n", (t as f64 * 0.7).sin());
    }
    fs::write(d.join("c.csv"), csv).unwrap();
    let out = tivacpd(d, &["detect", "c.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`flat`") && err.contains("zero variance"), "{err}");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.csv"), "a,b\n1,2\n3,oops\n").unwrap();
    let out = tivacpd(d, &["detect", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv: line 3"), "{err}");
}

#[test]
fn strict_non_convergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&tivacpd(
        d,
        &["simulate", "jumping_mean", "--length", "200", "--segments", "2", "-o", "data"],
    ));
    let args = [
        "detect",
        "data/jumping_mean_0.csv",
        "--set",
        "detect.tvgl.max_iters=2",
    ];
    let out = tivacpd(d, &[&args[..], &["--strict"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tvgl"));
    ok(&tivacpd(d, &args));
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("run.toml"),
        "detector = \"cov\"\n[detect.tvgl]\nbeta = 3.0\n[sim]\nlength = 300\n",
    )
    .unwrap();
    let show = |extra: &[&str]| {
        let out = tivacpd(d, &[&["config", "-c", "run.toml"], extra].concat());
        ok(&out);
        let text = String::from_utf8(out.stdout).unwrap();
        text.parse::<toml::Table>().unwrap()
    };
    let t = show(&[]);
    assert_eq!(t["detector"].as_str(), Some("cov"));
    assert_eq!(t["detect"]["tvgl"]["beta"].as_float(), Some(3.0));
    assert_eq!(t["detect"]["tvgl"]["lambda"].as_float(), Some(0.05));
    let t = show(&["--set", "detect.tvgl.beta=7", "--seed", "9"]);
    assert_eq!(t["detect"]["tvgl"]["beta"].as_float(), Some(7.0));
    assert_eq!(t["sim"]["seed"].as_integer(), Some(9));
    assert_eq!(t["sim"]["length"].as_integer(), Some(300));

    let out = Command::new(env!("CARGO_BIN_EXE_tivacpd"))
        .current_dir(d)
        .env("TIVACPD_CONFIG", "run.toml")
        .arg("config")
        .output()
        .unwrap();
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("detector = \"cov\""));
}

#[test]
fn benchmark_table_has_every_detector_and_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = tivacpd(
        dir.path(),
        &[
            "benchmark",
            "--seeds",
            "1",
            "--set",
            "sim.length=200",
            "--set",
            "sim.n_segments=3",
        ],
    );
    ok(&out);
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5);
    for title in ["Jumping Mean", "Changing Variance", "Changing Correlation", "Arbitrary CPs"] {
        assert!(lines[0].contains(title), "{title} missing from header");
    }
    for (row, label) in lines[2..].iter().zip(["TiVaCPD", "CovScore-only", "DistScore-only"]) {
        assert!(row.starts_with(&format!("| {label} |")), "{row}");
    }
}
