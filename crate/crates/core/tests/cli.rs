//! End-to-end tests of the `jmbound` binary: exit codes, output schemas,
//! and byte-level determinism of seeded verify reports.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jmbound"))
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jmbound-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn cone_rate_matches_closed_form() {
    let input = write_temp(
        "orthant3.json",
        r#"{"normals": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]}"#,
    );
    let out = run(&["cone-rate", "--input", input.to_str().unwrap()]);
    let v = stdout_json(&out);
    let rate = v["rate"].as_f64().unwrap();
    assert!((rate - 1.0 / 3.0_f64.sqrt()).abs() < 1e-9, "rate {rate}");
    assert_eq!(v["direction"].as_array().unwrap().len(), 3);
    assert!((v["hull_margin"].as_f64().unwrap() - rate).abs() < 1e-8);
}

#[test]
fn certificate_schema_and_values() {
    let input = write_temp("pair.json", r#"{"masses": [1.0, 1.0], "dim": 2}"#);
    let out = run(&["nbody-certificate", "--input", input.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["masses"].as_array().unwrap().len(), 2);
    let single = v["bound_single"].as_f64().unwrap();
    let diameter = v["bound_diameter"].as_f64().unwrap();
    assert!((single - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    assert!((diameter - 2.0 * single).abs() < 1e-12);
    assert!((v["constants"]["rate"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["constants"]["Lambda"].as_f64().unwrap() > 0.0);
    assert!(v["constants"]["C"].as_f64().unwrap() > 0.0);
}

#[test]
fn arrangement_rate_lists_chambers() {
    let input = write_temp(
        "braid3.json",
        r#"{"normals": [[0.7071067811865476, -0.7071067811865476, 0.0],
                        [0.7071067811865476, 0.0, -0.7071067811865476],
                        [0.0, 0.7071067811865476, -0.7071067811865476]]}"#,
    );
    let out = run(&["arrangement-rate", "--input", input.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["hyperplanes"].as_i64().unwrap(), 3);
    assert_eq!(v["chambers"].as_i64().unwrap(), 6);
    assert!((v["global_rate"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["rates"].as_array().unwrap().len(), 6);
}

#[test]
fn escape_demo_emits_csv_and_respects_bound() {
    let input = write_temp(
        "escape.json",
        r#"{"system": {"masses": [1.0, 1.0], "dim": 2},
            "coords": [[0.2, 0.0], [-0.2, 0.0]]}"#,
    );
    let out = run(&["escape-demo", "--input", input.to_str().unwrap(), "--samples", "16"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,q0_0,q0_1,q1_0,q1_1,potential,dist_to_collision,envelope,jm_cumlen"
    );
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 17);

    let summary: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(summary["within_bound"].as_bool().unwrap());
    let jm_length = summary["jm_length"].as_f64().unwrap();
    assert!(jm_length > 0.0);

    // Arclength and cumulative metric length are monotone; the potential
    // decays to 1 at the crossing; the cumulative length reproduces the
    // summary value.
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0]);
        assert!(pair[1][8] >= pair[0][8]);
    }
    let last = rows.last().unwrap();
    assert!((last[5] - 1.0).abs() < 1e-9, "final potential {}", last[5]);
    assert!((last[8] - jm_length).abs() < 1e-6 * jm_length, "cumlen {}", last[8]);
    for row in &rows {
        assert!(row[7] <= 1.0 + 1e-9, "envelope violated: {}", row[7]);
    }
}

#[test]
fn arrangement_rate_accepts_subspace_input() {
    // Two orthogonal lines in R^3, each of codimension 2; lifting along the
    // first complement axis gives two orthogonal hyperplanes.
    let input = write_temp(
        "subspaces.json",
        r#"{"complement_bases": [
            [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        ]}"#,
    );
    let out = run(&["arrangement-rate", "--input", input.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["hyperplanes"].as_i64().unwrap(), 2);
    assert_eq!(v["chambers"].as_i64().unwrap(), 4);
    assert!((v["global_rate"].as_f64().unwrap() - 1.0 / 2.0_f64.sqrt()).abs() < 1e-9);

    // Giving both shapes at once is a schema error.
    let both =
        write_temp("both.json", r#"{"normals": [[1.0, 0.0]], "complement_bases": [[[1.0, 0.0]]]}"#);
    let out = run(&["arrangement-rate", "--input", both.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn appendix_b_csv_has_decreasing_aspect() {
    let out = run(&["appendix-b", "--samples", "20"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let aspects: Vec<f64> =
        csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(aspects.len(), 20);
    for pair in aspects.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12);
    }
    assert!(*aspects.last().unwrap() > 2.0);
}

#[test]
fn malformed_input_exits_2() {
    let input = write_temp("bad.json", r#"{"masses": [1.0]}"#); // missing dim
    let out = run(&["nbody-certificate", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let input = write_temp("one_body.json", r#"{"masses": [1.0], "dim": 2}"#);
    let out = run(&["nbody-certificate", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn missing_input_file_exits_2() {
    let out = run(&["cone-rate", "--input", "/nonexistent/cone.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_cone_exits_2() {
    let input = write_temp("degenerate.json", r#"{"normals": [[1.0, 0.0], [-1.0, 0.0]]}"#);
    let out = run(&["cone-rate", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_3() {
    // Twelve constraints route the projection to the iterative tier, which
    // cannot reach a 1e-30 residual and must report a solver failure.
    let mut normals = Vec::new();
    for i in 0..12 {
        let phi = std::f64::consts::TAU * i as f64 / 12.0;
        let v = [1.0, 0.5 * phi.cos(), 0.5 * phi.sin()];
        let len = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        normals.push(vec![v[0] / len, v[1] / len, v[2] / len]);
    }
    let spec = serde_json::json!({ "normals": normals });
    let input = write_temp("tight.json", &spec.to_string());
    let out = run(&["cone-rate", "--input", input.to_str().unwrap(), "--tol-proj", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn seeded_verify_reports_are_byte_identical() {
    let dir = std::env::temp_dir().join(format!("jmbound-verify-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for path in [&a, &b] {
        let out = run(&["verify", "--seed", "7", "--output", path.to_str().unwrap()]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().count(), 7, "one summary line per suite:\n{text}");
        for line in text.lines() {
            assert!(line.starts_with("PASS "), "unexpected line {line:?}");
        }
    }
    let bytes_a = fs::read(&a).unwrap();
    let bytes_b = fs::read(&b).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b);
    assert_eq!(*bytes_a.last().unwrap(), b'\n');

    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(report["seed"].as_u64().unwrap(), 7);
    assert!(report["passed"].as_bool().unwrap());
    assert_eq!(report["suites"].as_array().unwrap().len(), 7);
}
