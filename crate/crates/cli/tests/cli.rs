use std::process::{Command, Output};

use morrey_cli::{Check, RunConfig, Report};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morrey")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn norm_examples() {
    let v = json(&["norm", "--function", "0 inf 1 -0.5"]);
    let value = v["results"]["norms"][0]["value"].as_f64().unwrap();
    assert!((value - 2.0 * 2f64.sqrt()).abs() < 1e-3 * value);
    assert_eq!(v["passed"], true);

    let v = json(&["norm", "--function", "0 inf 1 -1"]);
    assert_eq!(v["results"]["norms"][0]["infinite"], true);
    assert!(v["results"]["norms"][0]["value"].is_null());

    let v = json(&["norm", "--function", ""]);
    assert_eq!(v["results"]["norms"][0]["value"].as_f64(), Some(0.0));
}

#[test]
fn both_modes_are_reported_in_order() {
    let v = json(&["norm", "--mode", "both", "--function", "0 1 1 -0.5; 1 3 -2 -0.5"]);
    let norms = v["results"]["norms"].as_array().unwrap();
    assert_eq!(norms[0]["mode"], "morrey");
    assert_eq!(norms[1]["mode"], "small");
    assert!(norms[1]["value"].as_f64() <= norms[0]["value"].as_f64());
}

#[test]
fn parse_errors_carry_position() {
    let out = run(&["norm", "--function", "0 1 1 -0.5\n1 2 x -0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");
}

#[test]
fn witness_commands_reject_p_equal_q() {
    for cmd in ["verify-thm1", "verify-thm2"] {
        let out = run(&[cmd, "--p", "2", "--q", "2"]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("p < q"));
    }
}

#[test]
fn verify_thm1_in_two_dimensions() {
    let v = json(&["verify-thm1", "--n", "2", "--p", "1", "--q", "2", "--s", "2"]);
    assert_eq!(v["passed"], true);
    for r in v["results"]["ratios"].as_array().unwrap() {
        let x = r["value"].as_f64().unwrap();
        assert!((1.98..=2.0 + 1e-9).contains(&x), "{r}");
    }
}

#[test]
fn verify_thm2_bounds() {
    let v = json(&["verify-thm2", "--eps", "0.5", "--eps", "0.1", "--eps", "0.01", "--s", "2"]);
    assert_eq!(v["passed"], true);
    let ladder = v["results"]["ladder"].as_array().unwrap();
    let gen2 = |i: usize| {
        ladder[i]["ratios"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["label"] == "gen_vnj(s=2)")
            .unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    for (i, eps) in [0.5f64, 0.1, 0.01].into_iter().enumerate() {
        assert!(gen2(i) >= 1.0 + (1.0 - eps.sqrt()).powi(2) - 1e-3);
    }
    let zb = ladder[2]["ratios"].as_array().unwrap().iter().find(|r| r["label"] == "zbaganu").unwrap();
    assert!(zb["value"].as_f64().unwrap() >= 1.799);
}

#[test]
fn every_check_is_machine_readable() {
    let v = json(&["verify-thm2", "--n", "3", "--p", "2", "--q", "4"]);
    for c in v["checks"].as_array().unwrap() {
        for key in ["name", "relation", "expected", "computed", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
}

/// Every numeric leaf of the JSON report appears in the CSV under the same
/// path with the same value to 15 significant digits.
#[test]
fn csv_matches_json() {
    let args = ["verify-thm1", "--s", "1.5"];
    let v = json(&args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = run(&csv_args);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<(String, String)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    let mut leaves = Vec::new();
    morrey_cli::report::flatten(&v, String::new(), &mut leaves);
    assert_eq!(rows.len(), leaves.len());
    let mut numeric = 0;
    for ((p1, a), (p2, b)) in rows.iter().zip(&leaves) {
        assert_eq!(p1, p2);
        if let (Ok(x), Ok(y)) = (a.parse::<f64>(), b.parse::<f64>()) {
            numeric += 1;
            assert_eq!(format!("{x:.14e}"), format!("{y:.14e}"), "{p1}");
        }
    }
    assert!(numeric > 50);
}

#[test]
fn config_file_with_flag_override_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"n": 2, "p": 1.0, "q": 2.0, "function": "0 inf 3 -0.5"}"#).unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "norm",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["config"]["n"], 1);
    let value = v["results"]["norms"][0]["value"].as_f64().unwrap();
    assert!((value - 6.0 * 2f64.sqrt()).abs() < 1e-3 * value);
}

#[test]
fn search_is_reproducible() {
    let args = ["search", "--trials", "30", "--seed", "5", "--s", "2"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    for est in v["results"][0]["estimates"].as_array().unwrap() {
        assert_eq!(est["violations"], 0);
        assert!(est["top_pairs"].as_array().unwrap().len() == 5);
    }
}

#[test]
fn search_with_witnesses_peaks_at_the_witness() {
    let v = json(&["search", "--trials", "40", "--with-witnesses", "--s", "1", "--s", "3"]);
    for est in v["results"][0]["estimates"].as_array().unwrap() {
        assert_eq!(est["best_ratio"], est["witness_ratio"], "{}", est["label"]);
        assert_eq!(est["best_label"], "witness");
    }
}

#[test]
fn constants_in_small_mode() {
    let v = json(&["constants", "--mode", "small", "--s", "2"]);
    assert_eq!(v["passed"], true);
    for est in v["results"][0]["estimates"].as_array().unwrap() {
        assert_eq!(est["best_label"], "witness(eps=0.0001)");
    }
}

#[test]
fn failed_check_fails_the_report() {
    let ok = Check::at_most("fine", 2.0, 1.5, 0.0);
    let bad = Check::at_least("short", 2.0, 1.5, 0.1);
    let r = Report::new("test", &RunConfig::default(), (), vec![ok, bad]).unwrap();
    assert!(!r.passed);
    assert_eq!(r.failures().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["short"]);
}
