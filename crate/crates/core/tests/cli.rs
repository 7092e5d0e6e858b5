//! End-to-end checks of the command-line binary: exit codes, artifact
//! shape, determinism, and report round-tripping.

use std::path::PathBuf;
use std::process::{Command, Output};

use gamma2_core::report::BoundReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamma2"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

fn tmp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("gamma2-cli-int");
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir.join(name)
}

#[test]
fn spectral_artifact_carries_config_and_exact_constants() {
    let out = run(&["spectral", "--model", "gaussian", "--resolution", "401", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().expect("header line");
    assert!(header.starts_with("# {"), "{header}");
    let cfg: serde_json::Value = serde_json::from_str(&header[2..]).expect("config JSON");
    assert_eq!(cfg["command"], "spectral");
    assert_eq!(cfg["resolution"], 401);
    assert_eq!(lines.next(), Some("name,value"));

    let mut cp = None;
    let mut residual = None;
    for line in lines {
        let (name, value) = line.split_once(',').expect("csv row");
        if name == "poincare_constant" {
            cp = Some(value.parse::<f64>().unwrap());
        }
        if name == "equality_residual" {
            residual = Some(value.parse::<f64>().unwrap());
        }
    }
    let cp = cp.expect("poincare row");
    assert!((cp - 1.0).abs() < 1e-3, "{cp}");
    assert!(residual.expect("residual row") < 1e-8);
}

#[test]
fn identical_configs_reproduce_byte_identical_artifacts() {
    let args =
        ["bounds", "--model", "subbotin:p=1.5", "--resolution", "401", "--no-timestamp"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "reruns must be byte-identical");

    // Without the suppression flag the stamp line appears.
    let stamped = run(&args[..args.len() - 1]);
    assert!(stdout(&stamped).lines().any(|l| l.starts_with("# generated_unix:")));
    assert!(!stdout(&a).contains("generated_unix"));
}

#[test]
fn bound_rows_round_trip_through_report_json() {
    let out = run(&["bounds", "--model", "gaussian", "--resolution", "401", "--format", "json",
        "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json artifact");
    let rows = doc["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 4);
    for row in rows {
        let report: BoundReport = serde_json::from_value(row.clone()).expect("report row");
        let back = serde_json::to_value(&report).expect("reserialize");
        assert_eq!(&back, row, "round trip must be lossless");
    }
}

#[test]
fn verification_passes_clean_and_flags_sabotage() {
    let out = run(&["verify", "--suite", "all", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("1..12"), "{text}");
    assert!(!text.contains("not ok"));

    let bad = run(&["verify", "--suite", "wig2", "--sabotage", "--no-timestamp"]);
    assert_eq!(bad.status.code(), Some(1), "sabotage must fail verification");
    let text = stdout(&bad);
    assert!(text.contains("not ok"), "{text}");
    // the failing certificate line pins down where the display breaks
    assert!(text.contains("s* ="), "{text}");
    assert!(text.contains("t* ="), "{text}");
}

#[test]
fn config_files_reject_unknown_keys() {
    let good = tmp_path("good.json");
    std::fs::write(&good, r#"{"model":{"kind":"product","n":10,"p":1.5},"no_timestamp":true}"#)
        .unwrap();
    let out = run(&["bounds", "--config", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let bad = tmp_path("bad.json");
    std::fs::write(&bad, r#"{"granularity": 12}"#).unwrap();
    let out = run(&["bounds", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("granularity"));
}

#[test]
fn malformed_invocations_use_the_model_error_code() {
    assert_eq!(run(&["bounds", "--model", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn decay_curves_tabulate_into_converse_rates() {
    // Synthetic decay curve xi(t) = e^{-2t}: the simple converse at slack s
    // is 2 * xi^{-1}(s) = -ln(s), read straight off the table.
    let path = tmp_path("decay.csv");
    let mut text = String::from("t,value\n");
    for i in 0..400 {
        let t = 1e-3 + i as f64 * 0.02;
        text.push_str(&format!("{},{}\n", t, (-2.0 * t).exp()));
    }
    std::fs::write(&path, text).unwrap();
    let out = run(&["transform", "--decay-csv", path.to_str().unwrap(), "--transform",
        "beta_from_xi_simple", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    let mut checked = 0;
    for line in body.lines().filter(|l| !l.starts_with('#') && !l.starts_with("s,")) {
        let (s, v) = line.split_once(',').unwrap();
        let s: f64 = s.parse().unwrap();
        let v: f64 = v.parse().unwrap();
        if s > 2e-3 && s < 0.9 {
            let exact = -s.ln();
            assert!((v - exact).abs() < 0.05 * exact + 1e-3, "s={s} v={v} exact={exact}");
            checked += 1;
        }
    }
    assert!(checked > 10, "{checked}");
}
