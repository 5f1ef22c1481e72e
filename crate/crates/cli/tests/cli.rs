use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qmcforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmcforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> (String, Value) {
    let path = dir.path().join(name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path_str(&path)]);
    let out = qmcforge(&full);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (path_str(&path).to_string(), json(&out))
}

fn last_merit(trace: &Value) -> f64 {
    trace["steps"].as_array().unwrap().last().unwrap()["merit"]
        .as_f64()
        .unwrap()
}

#[test]
fn lattice_construction_round_trips() {
    let dir = TempDir::new().unwrap();
    let (rule, trace) = construct(
        &dir,
        "r.json",
        &[
            "--kind",
            "lattice",
            "--N",
            "31",
            "--s",
            "4",
            "--alpha",
            "1",
            "--weights",
            "product:j^-2",
        ],
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&rule).unwrap()).unwrap();
    assert_eq!(doc["type"], "lattice");
    assert_eq!(doc["z"][0], 1);
    let out = qmcforge(&["evaluate", &rule]);
    assert_eq!(out.status.code(), Some(0));
    let p = json(&out)["merit"]["P"].as_f64().unwrap();
    assert!((p - last_merit(&trace)).abs() <= 1e-12);
}

#[test]
fn polynomial_construction_defaults_to_smallest_irreducible() {
    let dir = TempDir::new().unwrap();
    let (rule, trace) = construct(
        &dir,
        "p.json",
        &[
            "--kind",
            "poly-lattice",
            "--b",
            "2",
            "--m",
            "5",
            "--s",
            "3",
            "--alpha",
            "1",
        ],
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&rule).unwrap()).unwrap();
    assert_eq!(doc["type"], "poly-lattice");
    // x^5 + x^2 + 1
    assert_eq!(doc["p"], serde_json::json!([1, 0, 1, 0, 0, 1]));
    assert_eq!(doc["q"][0], serde_json::json!([1]));
    let out = qmcforge(&["evaluate", &rule]);
    let p = json(&out)["merit"]["P"].as_f64().unwrap();
    assert!((p - last_merit(&trace)).abs() <= 1e-12);
}

#[test]
fn fast_construction_needs_prime_modulus() {
    let out = qmcforge(&[
        "construct",
        "--kind",
        "lattice",
        "--N",
        "30",
        "--s",
        "3",
        "--fast",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let (fast, _) = construct(
        &dir,
        "f.json",
        &[
            "--kind",
            "lattice",
            "--N",
            "31",
            "--s",
            "4",
            "--weights",
            "product:j^-2",
            "--fast",
        ],
    );
    let (naive, _) = construct(
        &dir,
        "n.json",
        &[
            "--kind",
            "lattice",
            "--N",
            "31",
            "--s",
            "4",
            "--weights",
            "product:j^-2",
        ],
    );
    let z = |p: &str| {
        serde_json::from_str::<Value>(&std::fs::read_to_string(p).unwrap()).unwrap()["z"].clone()
    };
    assert_eq!(z(&fast), z(&naive));
}

#[test]
fn evaluate_under_changed_parameters_and_with_rho() {
    let dir = TempDir::new().unwrap();
    let (rule, _) = construct(
        &dir,
        "r.json",
        &[
            "--kind",
            "lattice",
            "--N",
            "31",
            "--s",
            "3",
            "--weights",
            "product:j^-2",
        ],
    );
    let base = json(&qmcforge(&["evaluate", &rule]))["merit"]["P"]
        .as_f64()
        .unwrap();
    let changed = json(&qmcforge(&[
        "evaluate",
        &rule,
        "--alpha",
        "2",
        "--weights",
        "product:j^-4",
    ]))["merit"]["P"]
        .as_f64()
        .unwrap();
    assert!(changed < base);
    let report = json(&qmcforge(&["evaluate", &rule, "--rho", "--discrepancy"]));
    assert!(report["merit"]["rho"].as_f64().unwrap() > 0.0);
    let entries = report["merit"]["per_subset"].as_array().unwrap();
    assert_eq!(entries.len(), 7);
    assert!(entries
        .iter()
        .all(|e| e["phi"].as_u64().is_some() && e["phi0"].as_u64().is_some()));
    let d = &report["discrepancy"];
    assert!(d["bound_joe"].as_f64().unwrap() > 0.0);
    assert!(d["bound_rho"].as_f64().unwrap() > 0.0);
    assert!(d["exact_dstar"].is_null());
}

#[test]
fn evaluate_reports_csv() {
    let dir = TempDir::new().unwrap();
    let (rule, _) = construct(
        &dir,
        "r.json",
        &["--kind", "lattice", "--N", "16", "--s", "2"],
    );
    let out = qmcforge(&["evaluate", &rule, "--discrepancy", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("P,rho,bound_joe,bound_rho,exact_dstar"));
    let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
    let exact: f64 = cells[4].parse().unwrap();
    let joe: f64 = cells[2].parse().unwrap();
    assert!(exact <= joe);
}

#[test]
fn evaluate_missing_file_is_a_usage_error() {
    assert_eq!(
        qmcforge(&["evaluate", "/nonexistent/rule.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn resource_caps_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let (rule, _) = construct(
        &dir,
        "big.json",
        &["--kind", "lattice", "--N", "2000", "--s", "2"],
    );
    assert_eq!(
        qmcforge(&["evaluate", &rule, "--rho"]).status.code(),
        Some(3)
    );
}

fn write_rule(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path_str(&path).to_string()
}

#[test]
fn certify_stability_small_rule() {
    let dir = TempDir::new().unwrap();
    let rule = write_rule(
        &dir,
        "five.json",
        r#"{"type": "lattice", "N": 5, "z": [1]}"#,
    );
    let out = qmcforge(&[
        "certify",
        "thm1",
        &rule,
        "--alpha",
        "1",
        "--weights",
        "product:1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cert = json(&out);
    assert_eq!(cert["passed"], true);
    assert!((cert["margin"].as_f64().unwrap() - 0.83).abs() < 0.01);
}

#[test]
fn certify_jensen_and_selectors() {
    let dir = TempDir::new().unwrap();
    let (rule, _) = construct(
        &dir,
        "r.json",
        &[
            "--kind",
            "lattice",
            "--N",
            "32",
            "--s",
            "3",
            "--weights",
            "product:j^-2",
        ],
    );
    let out = qmcforge(&["certify", "jensen", &rule, "--delta", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
    for t in ["prop1", "eq1"] {
        assert_eq!(
            qmcforge(&["certify", t, &rule]).status.code(),
            Some(0),
            "{t}"
        );
    }
    assert_eq!(qmcforge(&["certify", "thm2", &rule]).status.code(), Some(2));

    let (poly, _) = construct(
        &dir,
        "p.json",
        &[
            "--kind",
            "poly-lattice",
            "--m",
            "4",
            "--s",
            "2",
            "--weights",
            "product:j^-2",
        ],
    );
    for t in ["thm2", "prop2", "jensen"] {
        assert_eq!(
            qmcforge(&["certify", t, &poly, "--alpha-prime", "2"])
                .status
                .code(),
            Some(0),
            "{t}"
        );
    }
}

#[test]
fn certify_rejects_non_monotone_weights() {
    let dir = TempDir::new().unwrap();
    let rule = write_rule(
        &dir,
        "r.json",
        r#"{"type": "lattice", "N": 13, "z": [1, 5]}"#,
    );
    let out = qmcforge(&[
        "certify",
        "thm1",
        &rule,
        "--alpha",
        "1",
        "--weights",
        "product:0.5,2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_certificate_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let rule = write_rule(
        &dir,
        "bad.json",
        r#"{"type": "lattice", "N": 31, "z": [1, 1]}"#,
    );
    let out = qmcforge(&[
        "certify",
        "prop1",
        &rule,
        "--alpha",
        "1",
        "--weights",
        "product:1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>, Option<f64>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let mut rows = Vec::new();
    let mut slope = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("# slope_log_sqrtP_vs_log_N,") {
            slope = Some(rest.parse().unwrap());
        } else {
            rows.push(line.split(',').map(String::from).collect());
        }
    }
    (header, rows, slope)
}

#[test]
fn sweep_over_primes_reports_convergence_slope() {
    let out = qmcforge(&[
        "sweep",
        "--kind",
        "lattice",
        "--grid",
        "17..251",
        "--primes",
        "--s",
        "2",
        "--alpha",
        "1",
        "--weights",
        "product:j^-2",
        "--certify",
        "thm1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows, slope) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(
        header,
        ["N_or_m", "P", "sqrtP", "prop_bound", "thm1_rhs", "passed"]
    );
    assert_eq!(rows.len(), 48);
    assert!(rows.iter().all(|r| r[5] == "true"));
    let slope = slope.unwrap();
    assert!((-1.2..=-0.85).contains(&slope), "slope {slope}");
}

#[test]
fn sweep_polynomial_grid() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = qmcforge(&[
        "sweep",
        "--kind",
        "poly-lattice",
        "--grid",
        "3..7",
        "--s",
        "2",
        "--weights",
        "product:j^-2",
        "--certify",
        "thm2",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows, slope) = csv_rows(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(header[4], "thm2_rhs");
    assert_eq!(rows.len(), 5);
    assert!(slope.unwrap() < -0.5);
}

#[test]
fn sweep_empty_grid_is_a_usage_error() {
    let out = qmcforge(&[
        "sweep", "--kind", "lattice", "--grid", "24..28", "--primes", "--s", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_supplies_flags() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("c.json");
    let rule = dir.path().join("r.json");
    std::fs::write(
        &config,
        serde_json::json!({"kind": "lattice", "N": 31, "s": 3, "weights": "product:j^-2", "out": path_str(&rule)}).to_string(),
    )
    .unwrap();
    let out = qmcforge(&["construct", "--config", path_str(&config)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&rule).unwrap()).unwrap();
    assert_eq!(doc["N"], 31);
    // Explicit flags override the config.
    let out = qmcforge(&["construct", "--config", path_str(&config), "--N", "37"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&rule).unwrap()).unwrap();
    assert_eq!(doc["N"], 37);

    let sweep = dir.path().join("s.json");
    std::fs::write(
        &sweep,
        r#"{"kind": "lattice", "grid": [17, 31], "s": 2, "certify": "thm1"}"#,
    )
    .unwrap();
    let out = qmcforge(&["sweep", "--config", path_str(&sweep)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&String::from_utf8(out.stdout).unwrap()).1.len(), 2);
}

#[test]
fn random_rules_follow_the_seed() {
    let run = |seed: &str| {
        let out = qmcforge(&[
            "construct",
            "--kind",
            "lattice",
            "--N",
            "101",
            "--s",
            "5",
            "--random",
            "--seed",
            seed,
        ]);
        json(&out)["z"].clone()
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qmcforge"))
            .args([
                "construct",
                "--kind",
                "lattice",
                "--N",
                "61",
                "--s",
                "4",
                "--weights",
                "product:j^-2",
            ])
            .env("QMCFORGE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(one.stdout, run("0").stdout);
    assert_eq!(run("many").status.code(), Some(2));
}
