use std::path::PathBuf;
use std::process::Command;

use mirror_sqkd::cli::run;
use serde_json::Value;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn ok(args: &[&str]) -> String {
    let mut full = vec!["mirror-sqkd"];
    full.extend_from_slice(args);
    let out = run(full);
    assert_eq!(out.code, 0, "{args:?} failed: {}", out.stderr);
    out.stdout
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).expect("valid json")
}

fn binary_status(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_mirror-sqkd"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap()
}

#[test]
fn tables_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tables");
    ok(&["tables", "--output", out.to_str().unwrap()]);
    let mut names: Vec<_> = std::fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        let want = std::fs::read_to_string(golden_dir().join(&name)).unwrap();
        let got = std::fs::read_to_string(out.join(&name)).unwrap();
        if name.ends_with(".csv") {
            // Full-precision floats: compare numerically.
            for (w, g) in want.lines().zip(got.lines()) {
                for (a, b) in w.split(',').zip(g.split(',')) {
                    match (a.parse::<f64>(), b.parse::<f64>()) {
                        (Ok(x), Ok(y)) => assert!((x - y).abs() < 1e-12, "{name}: {a} vs {b}"),
                        _ => assert_eq!(a, b, "{name}"),
                    }
                }
            }
            assert_eq!(want.lines().count(), got.lines().count());
        } else {
            assert_eq!(want, got, "{name} drifted from the golden copy");
        }
    }
}

#[test]
fn tables_to_stdout_concatenates_every_listing() {
    let text = ok(&["tables"]);
    assert!(text.contains("# full attack"));
    assert!(text.contains("epsilon,p_closed_form"));
}

#[test]
fn simulate_output_is_byte_identical_across_workers_and_runs() {
    let base = [
        "simulate",
        "--attack",
        "weaker",
        "--epsilon",
        "0.35",
        "--rounds",
        "50000",
        "--seed",
        "7",
    ];
    let one = ok(&[&base[..], &["--workers", "1"]].concat());
    let four = ok(&[&base[..], &["--workers", "4"]].concat());
    let again = ok(&[&base[..], &["--workers", "1"]].concat());
    assert_eq!(one, four);
    assert_eq!(one, again);
    let other_seed = ok(&[
        "simulate",
        "--attack",
        "weaker",
        "--epsilon",
        "0.35",
        "--rounds",
        "50000",
        "--seed",
        "8",
    ]);
    assert_ne!(one, other_seed);
}

#[test]
fn exact_json_is_normalized() {
    let v = json(&["exact", "--variant", "mirror", "--attack", "full"]);
    let total: f64 = v["distribution"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["probability"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
    let click = v["rates"]["swap_all_click_rate"]["value"].as_f64().unwrap();
    assert!((click - 2.0 / 9.0).abs() < 1e-12);
}

#[test]
fn exact_csv_has_one_row_per_outcome() {
    let text = ok(&["exact", "--format", "csv"]);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "op,alice_click_1,alice_click_0,bob_basis,bob_click_1,bob_click_0,eve_outcome,probability"
    );
    let total: f64 = lines
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_rounds_to_two_decimals() {
    let text = ok(&["sweep", "--epsilon-grid", "0.5,1"]);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",0.55,0.83,0.73"), "{}", rows[1]);
    assert!(rows[2].ends_with(",0.00,0.33,0.50"), "{}", rows[2]);
}

#[test]
fn sweep_json_and_human_formats() {
    let v = json(&["sweep", "--epsilon-grid", "0:0.2:0.1", "--format", "json"]);
    assert_eq!(v.as_array().unwrap().len(), 3);
    let human = ok(&["sweep", "--epsilon-grid", "0.3", "--format", "human"]);
    assert!(human.contains("0.3000"));
}

#[test]
fn verify_reports_pass() {
    let v = json(&["verify", "--grid", "11"]);
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["points"].as_array().unwrap().len(), 11);
    let full = json(&["verify", "--attack", "full"]);
    assert!(full["max_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn verify_fails_with_impossible_tolerance() {
    let out = run(["mirror-sqkd", "verify", "--attack", "full", "--tol", "0"]);
    assert_eq!(out.code, 1);
}

#[test]
fn detect_flags_a_lopsided_attack() {
    let v = json(&[
        "detect",
        "--attack",
        "weaker",
        "--epsilon",
        "0.3",
        "--rounds",
        "50000",
    ]);
    assert_eq!(v["detection"]["detected"], Value::Bool(true));
    let v = json(&["detect", "--rounds", "50000"]);
    assert_eq!(v["detection"]["detected"], Value::Bool(false));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.conf");
    std::fs::write(
        &path,
        "# weaker attack run\nattack = weaker\nepsilon = 0.5\nrounds = 1000\nseed = 3\n",
    )
    .unwrap();
    let v = json(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--rounds",
        "2000",
    ]);
    assert_eq!(v["tally"]["rounds"].as_u64(), Some(2000));
    assert_eq!(v["config"]["master_seed"].as_u64(), Some(3));

    std::fs::write(&path, "attack = weaker\nepsilon = 2\n").unwrap();
    let out = run(["mirror-sqkd", "exact", "--config", path.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rates.json");
    let out = run(["mirror-sqkd", "exact", "--output", path.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(v["rates"].is_object());
}

#[test]
fn binary_exit_codes() {
    assert_eq!(binary_status(&["--version"]), 0);
    assert_eq!(binary_status(&["verify", "--attack", "full"]), 0);
    assert_eq!(
        binary_status(&["exact", "--attack", "weaker", "--epsilon", "-0.1"]),
        1
    );
    assert_eq!(binary_status(&["simulate", "--rounds", "0"]), 1);
    assert_eq!(binary_status(&["frobnicate"]), 1);
    assert_eq!(
        binary_status(&["detect", "--format", "csv", "--rounds", "10"]),
        1
    );
}
