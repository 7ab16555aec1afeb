//! End-to-end runs of the built binary, one per documented behavior.

use std::path::Path;
use std::process::{Command, Output};

fn qfeff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfeff")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

#[test]
fn trivial_curvature_dump_lists_the_expected_forms() {
    let out = qfeff(&["curvature", "--structure", "heisenberg", "--P", "1", "--x", "0", "--H", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Gamma^1_4 = (1/2*I)*theta^1"), "missing mixing form in:\n{text}");
    assert!(text.contains("Gamma^1_1 = (1/2*I)*theta^4"), "{text}");
    assert!(text.contains("Gamma^3_2 = (-1/2*I)*theta^1"), "{text}");
    assert!(!text.contains("Gamma^1_2"), "vanishing form printed:\n{text}");
    assert!(!text.contains("Gamma^3_4"), "vanishing form printed:\n{text}");
}

#[test]
fn curvature_json_has_the_documented_shape() {
    let out = qfeff(&[
        "curvature",
        "--structure",
        "heisenberg",
        "--P",
        "1",
        "--x",
        "0",
        "--H",
        "0",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["structure"], "heisenberg");
    assert!(v["connection"].as_array().is_some_and(|a| !a.is_empty()));
    assert!(v["ricci"].as_array().is_some());
    assert!(v["parameters"].is_object());
    assert!(v["scalar"].is_string());
}

#[test]
fn curvature_latex_uses_form_notation() {
    let out = qfeff(&[
        "curvature",
        "--structure",
        "heisenberg",
        "--P",
        "1",
        "--x",
        "0",
        "--H",
        "0",
        "--format",
        "latex",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\\Gamma^{1}_{4} &= \\tfrac{1}{2} i\\, \\theta^{1}"), "{text}");
    assert!(text.contains("\\Psi_0"), "{text}");
}

#[test]
fn unknown_structure_is_a_usage_error() {
    let out = qfeff(&["curvature", "--structure", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown structure"), "{}", stderr(&out));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = qfeff(&["check", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unit_section_check_passes() {
    let out =
        qfeff(&["check", "--structure", "heisenberg", "--psi", "1", "--samples", "5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("verdict: satisfied"), "{text}");
    assert!(text.contains("branch: t_zero"), "{text}");
}

#[test]
fn off_profile_p_fails_the_check() {
    let out = qfeff(&[
        "check",
        "--structure",
        "heisenberg",
        "--P",
        "1+0.1*r",
        "--samples",
        "4",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["branch"], "t_zero");
    let checks = v["checks"].as_array().expect("checks array");
    let failing = checks
        .iter()
        .find(|c| c["name"] == "alpha_plane_ricci")
        .expect("degenerate-plane Ricci check present");
    assert_eq!(failing["verdict"], false);
    let sample = &failing["samples"][0];
    assert!(sample["point"].as_array().is_some_and(|p| p.len() == 3));
    assert!(sample["residuals"].as_array().is_some_and(|r| !r.is_empty()));
    assert_eq!(sample["pass"], false);
}

#[test]
fn loose_tolerance_flips_a_borderline_verdict() {
    // A tiny x1-dependent dent in an otherwise exact profile leaves
    // residuals near 1e-5: visible at the default tolerance, ignorable at
    // a loose one.
    let args_base = [
        "check",
        "--structure",
        "heisenberg",
        "--P",
        "(1 + 0.0001*x1)/cos(0.5*r)",
        "--samples",
        "3",
        "--seed",
        "5",
    ];
    let strict = qfeff(&args_base);
    assert_eq!(strict.status.code(), Some(1));
    let mut loose_args = args_base.to_vec();
    loose_args.extend_from_slice(&["--tolerance", "1e-2"]);
    let loose = qfeff(&loose_args);
    assert_eq!(loose.status.code(), Some(0), "stdout: {}", stdout(&loose));
}

#[test]
fn same_seed_and_config_reproduce_byte_identical_json() {
    let args = [
        "check",
        "--structure",
        "heisenberg",
        "--psi",
        "exp(x1 + I*x2)",
        "--samples",
        "4",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let a = qfeff(&args);
    let b = qfeff(&args);
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn constant_gauge_invariance_passes_at_ten_samples() {
    let out = qfeff(&[
        "invariance",
        "--structure",
        "heisenberg",
        "--P",
        "1 + 0.1*r",
        "--x",
        "0.2 + 0.1*I",
        "--H",
        "0.3",
        "--gauge-tau",
        "0.3",
        "--gauge-theta",
        "-0.2",
        "--samples",
        "10",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("verdict: satisfied"), "{}", stdout(&out));
}

#[test]
fn identity_gauge_reports_zero_deviation() {
    let out = qfeff(&[
        "invariance",
        "--gauge-tau",
        "0",
        "--gauge-theta",
        "0",
        "--samples",
        "3",
        "--seed",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["max_deviation"], 0.0);
}

#[test]
fn expression_gauge_invariance_passes() {
    let out = qfeff(&[
        "invariance",
        "--P",
        "1 + 0.1*r",
        "--x",
        "0.1",
        "--gauge-tau",
        "0.2*x1",
        "--gauge-theta",
        "0.1*x2",
        "--samples",
        "5",
        "--seed",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn fefferman_mode_fits_the_conformal_factor() {
    let out = qfeff(&[
        "invariance",
        "--fefferman",
        "--gauge-tau",
        "0.3",
        "--gauge-theta",
        "-0.2",
        "--samples",
        "4",
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["mode"], "fefferman");
    let s = &v["samples"][0];
    let scale = s["scale"].as_f64().expect("scale present");
    let expected = s["expected_scale"].as_f64().expect("expected present");
    assert!((scale - 0.6f64.exp()).abs() <= 1e-9, "scale {scale}");
    assert!((scale - expected).abs() <= 1e-9);
}

#[test]
fn missing_gauge_is_a_usage_error() {
    let out = qfeff(&["invariance", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gauge"), "{}", stderr(&out));
}

#[test]
fn conflicting_data_flags_are_a_usage_error() {
    let out = qfeff(&["check", "--psi", "1", "--P", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qfeff(&["check", "--P", "1", "--a", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = std::env::temp_dir().join(format!("qfeff-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("check.toml");
    std::fs::write(
        &cfg,
        r#"
structure = "heisenberg"
format = "json"

[parameters]
psi = "1"

[samples]
count = 3
seed = 7
"#,
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let out = qfeff(&["check", "--config", cfg_s]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["checks"][0]["samples"].as_array().map(Vec::len), Some(3));

    // A flag beats the file: text format has no JSON braces.
    let out = qfeff(&["check", "--config", cfg_s, "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("branch:"), "{}", stdout(&out));

    // Reports can land in a file instead of stdout.
    let rep = dir.join("rep.json");
    let out = qfeff(&["check", "--config", cfg_s, "--out", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let body = std::fs::read_to_string(&rep).unwrap();
    serde_json::from_str::<serde_json::Value>(&body).expect("file holds json");

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn structure_toml_files_load() {
    let dir = std::env::temp_dir().join(format!("qfeff-st-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let st = dir.join("flat.toml");
    std::fs::write(
        &st,
        r#"
name = "flat-copy"
mu = ["1", "I", "0"]
lambda = ["-x2", "x1", "0.5"]
"#,
    )
    .unwrap();
    let out = qfeff(&[
        "check",
        "--structure",
        st.to_str().unwrap(),
        "--psi",
        "1",
        "--samples",
        "2",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bad_config_keys_are_rejected() {
    let dir = std::env::temp_dir().join(format!("qfeff-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "structrue = \"heisenberg\"\n").unwrap();
    let out = qfeff(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
    assert!(!Path::new("nonexistent").exists());
}
