use std::collections::BTreeMap;
use std::process::{Command, Output};

use serde_json::Value;

fn qpk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpk"))
        .args(args)
        .env_remove("QPK_SEED")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn without_clock(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_clock_seconds");
    v
}

#[test]
fn keygen_is_deterministic_and_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = qpk(&[
            "keygen",
            "--r",
            "2",
            "--s",
            "16",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        let summary = json_of(&out);
        assert_eq!(summary["copy_budget"], 2);
    }
    let ka = std::fs::read(&a).unwrap();
    assert_eq!(ka, std::fs::read(&b).unwrap());
    let pa = std::fs::read(dir.path().join("a.json.pub.json")).unwrap();
    assert_eq!(
        pa,
        std::fs::read(dir.path().join("b.json.pub.json")).unwrap()
    );

    let key: Value = serde_json::from_slice(&ka).unwrap();
    let x = key["x"].as_array().unwrap();
    assert_eq!(x.len(), 16);
    assert!(x.iter().all(|v| (1..=5).contains(&v.as_u64().unwrap())));
    let copies: Value = serde_json::from_slice(&pa).unwrap();
    assert_eq!(copies.as_array().unwrap().len(), 2);

    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = std::fs::metadata(&a).unwrap().permissions().mode();
        assert_eq!(mode & 0o777, 0o600);
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let via_flag = qpk(&["keygen", "--r", "1", "--s", "8", "--seed", "99"]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_qpk"))
        .args(["keygen", "--r", "1", "--s", "8"])
        .env("QPK_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(json_of(&via_flag), json_of(&via_env));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["keygen", "--r", "0", "--s", "3"],
        vec!["keygen", "--r", "65", "--s", "3"],
        vec!["keygen", "--r", "1", "--s", "5000"],
        vec!["bound", "--r", "1"],
        vec!["bound", "--r", "1", "--s", "3", "--epsilon", "0.1"],
        vec!["bound", "--r", "1", "--epsilon", "1.5"],
        vec!["verify", "--t-max", "17"],
        vec!["attack", "--r", "1", "--s", "2", "--t-prime", "1"],
        vec!["attack", "--r", "12", "--s", "2", "--t-prime", "6"],
        vec!["sweep", "--s", ""],
        vec!["sweep", "--s", "1..x"],
        vec!["simulate", "--r", "1", "--s", "2", "--trials", "0"],
        vec!["frobnicate"],
    ] {
        let out = qpk(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bound_outputs() {
    let v = json_of(&qpk(&["bound", "--r", "1", "--epsilon", "0.01"]));
    assert_eq!(v["results"]["required_s"], 95);
    assert!(v["results"]["required_s_exact"].as_u64().unwrap() <= 95);
    let v = json_of(&qpk(&["bound", "--r", "1", "--s", "95"]));
    let p = v["results"]["p_break_bound"].as_f64().unwrap();
    assert!((p - 0.0087).abs() < 5e-5 && p < 0.01);
}

#[test]
fn honest_simulation_always_accepts() {
    let v = json_of(&qpk(&[
        "simulate", "--r", "2", "--s", "32", "--trials", "10000",
    ]));
    assert_eq!(v["results"]["acceptance"]["mean"], 1.0);
    assert_eq!(v["results"]["acceptance"]["trials"], 10000);
    assert_eq!(v["pass"], true);
}

#[test]
fn attack_simulations_match_analytic_values() {
    let v = json_of(&qpk(&[
        "simulate",
        "--mode",
        "attack",
        "--r",
        "1",
        "--s",
        "10",
        "--strategy",
        "optimal",
        "--trials",
        "100000",
    ]));
    let expected = 0.75f64.powi(10);
    assert!((v["results"]["expected_acceptance"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert_eq!(v["results"]["within_4_sigma"], true);

    let v = json_of(&qpk(&[
        "attack",
        "--r",
        "1",
        "--s",
        "10",
        "--strategy",
        "random",
        "--trials",
        "100000",
    ]));
    assert_eq!(v["results"]["expected_acceptance"], 2f64.powi(-10));
    assert_eq!(v["results"]["within_4_sigma"], true);
    assert_eq!(v["results"]["below_bound"], true);
}

#[test]
fn reports_are_reproducible() {
    let args = [
        "attack",
        "--r",
        "2",
        "--s",
        "3",
        "--t-prime",
        "1",
        "--strategy",
        "phase-est",
        "--trials",
        "5000",
        "--seed",
        "3",
    ];
    let a = without_clock(json_of(&qpk(&args)));
    let b = without_clock(json_of(&qpk(&args)));
    assert_eq!(a, b);
    assert_eq!(a["seed"], 3);
    let c = without_clock(json_of(&qpk(&[
        "attack",
        "--r",
        "2",
        "--s",
        "3",
        "--t-prime",
        "1",
        "--strategy",
        "phase-est",
        "--trials",
        "5000",
        "--seed",
        "4",
    ])));
    assert_ne!(a["results"], c["results"]);
}

#[test]
fn csv_and_json_round_trip() {
    let args = [
        "attack", "--r", "2", "--s", "2", "--trials", "3000", "--seed", "5",
    ];
    let json = json_of(&qpk(&args));
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = qpk(&csv_args);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let fields: BTreeMap<&str, &str> = header.iter().zip(row.iter()).collect();
    let mut checked = 0;
    for (key, text) in &fields {
        if *key == "wall_clock_seconds" {
            continue;
        }
        let pointer = format!("/{}", key.replace('.', "/"));
        let value = json
            .pointer(&pointer)
            .unwrap_or_else(|| panic!("{key} missing from JSON"));
        if let Some(x) = value.as_f64() {
            assert_eq!(text.parse::<f64>().unwrap(), x, "{key}");
            checked += 1;
        }
    }
    assert!(checked >= 8);
}

#[test]
fn sweep_tables() {
    let out = qpk(&[
        "sweep", "--t", "1..8", "--s", "1", "--trials", "200", "--format", "csv",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        headers,
        [
            "r",
            "s",
            "t",
            "alpha",
            "alpha_s",
            "bound",
            "mc_estimate",
            "std_error"
        ]
    );
    let alphas: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[3].parse().unwrap())
        .collect();
    assert_eq!(alphas.len(), 8);
    assert!(alphas.windows(2).all(|w| w[1] > w[0]));

    let out = qpk(&[
        "sweep", "--r", "2", "--s", "50..55", "--trials", "100", "--format", "csv",
    ]);
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let logs: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[5].parse::<f64>().unwrap().ln())
        .collect();
    let c = std::f64::consts::PI.powi(2) / 4.0 - std::f64::consts::PI.powi(4) / 48.0;
    let slope = (1.0 - c / 25.0f64).ln();
    for w in logs.windows(2) {
        assert!((w[1] - w[0] - slope).abs() < 1e-12);
    }

    let v = json_of(&qpk(&[
        "sweep",
        "--r",
        "1,2",
        "--t-prime",
        "0",
        "--s",
        "2",
        "--trials",
        "100",
    ]));
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_eig_only() {
    let v = json_of(&qpk(&["verify", "--only", "eig", "--t-max", "16"]));
    let checks = v["results"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 16);
    assert!(checks
        .iter()
        .all(|c| c["pass"] == true && c["check"] == "eig"));
    assert!(v["results"]["limitation"]
        .as_str()
        .unwrap()
        .contains("not reproducible"));
}

#[test]
fn verify_catches_a_corrupted_povm() {
    let out = qpk(&[
        "verify",
        "--only",
        "povm",
        "--t-max",
        "4",
        "--inject-fault",
        "povm",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
    let structural: Vec<_> = v["results"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["check"] == "povm-structure")
        .collect();
    assert_eq!(structural.len(), 4);
    assert!(structural.iter().all(|c| c["pass"] == false));
}

#[test]
fn verify_small_suite_passes() {
    let out = qpk(&[
        "verify",
        "--only",
        "helstrom,discrete-continuous,product-rule",
        "--t-max",
        "2",
        "--trials",
        "20000",
        "--format",
        "text",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS product-rule-monte-carlo"));
    assert!(!text.contains("FAIL"));
}
