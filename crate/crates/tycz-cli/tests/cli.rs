//! End-to-end checks of the command-line interface: exit codes, artifact
//! shape, and byte-level reproducibility modulo the timestamp field.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tycz-lab"))
}

fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn unknown_flag_exits_three() {
    let out = bin().args(["series", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_subcommand_exits_three() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["series", "solve", "invariants", "limits", "tycz", "epsilon", "hnorm", "verify-all"] {
        assert!(text.contains(sub), "help is missing `{sub}`");
    }
}

#[test]
fn hnorm_rejects_alpha_at_most_one() {
    let dir = tempdir("hnorm-bad");
    let out = bin()
        .args(["hnorm", "--alpha", "0.5", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn series_artifact_has_the_documented_shape() {
    let dir = tempdir("series-shape");
    let out = bin()
        .args(["series", "--y0", "0", "--order", "12", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("series.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["params"]["y0"], 0.0);
    assert_eq!(v["params"]["order"], 12);
    assert_eq!(v["series"]["center"], 0.0);
    assert_eq!(v["series"]["order"], 12);
    assert_eq!(v["series"]["coeffs"].as_array().unwrap().len(), 13);
    assert!(v["timestamp"].is_string());
    // b2 = 1/2 for y0 = 0
    let b2 = v["series"]["coeffs"][2].as_f64().unwrap();
    assert!((b2 - 0.5).abs() < 1e-14);
}

#[test]
fn extended_precision_matches_double() {
    let d1 = tempdir("prec-double");
    let d2 = tempdir("prec-extended");
    bin().args(["series", "--precision", "double", "--out"]).arg(&d1).status().unwrap();
    bin().args(["series", "--precision", "extended", "--out"]).arg(&d2).status().unwrap();
    let j1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d1.join("series.json")).unwrap()).unwrap();
    let j2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d2.join("series.json")).unwrap()).unwrap();
    for k in 0..=12 {
        let a = j1["series"]["coeffs"][k].as_f64().unwrap();
        let b = j2["series"]["coeffs"][k].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0), "coeff {k}: {a} vs {b}");
    }
}

#[test]
fn reruns_are_byte_identical_modulo_timestamp() {
    let dir = tempdir("idem");
    let run = || {
        let st = bin()
            .args(["tycz", "--model", "hyperbolic", "--n", "3", "--out"])
            .arg(&dir)
            .status()
            .unwrap();
        assert!(st.success());
        (
            std::fs::read_to_string(dir.join("tycz_hyperbolic_3.json")).unwrap(),
            std::fs::read_to_string(dir.join("tycz_hyperbolic_3.csv")).unwrap(),
        )
    };
    let (json1, csv1) = run();
    let (json2, csv2) = run();
    assert_eq!(strip_timestamp(&json1), strip_timestamp(&json2));
    assert_eq!(csv1, csv2);
}

#[test]
fn solve_writes_the_declared_csv_schema() {
    let dir = tempdir("solve-csv");
    let out = bin()
        .args(["solve", "--rtol", "1e-10", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "r,y,yp,ypp,yppp,ypppp");
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 6);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("solve.json")).unwrap()).unwrap();
    for key in ["y0", "n", "a_estimate", "a_uncertainty", "residual_max"] {
        assert!(
            !meta["metadata"][key].is_null(),
            "metadata is missing {key}"
        );
    }
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("tycz-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
