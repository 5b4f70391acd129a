//! The command-line contract, exercised through the built binary.

use std::process::Command;

use serde_json::Value;

fn bvbfv(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bvbfv")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn structured(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "structured"]);
    let (code, out, err) = bvbfv(&all);
    assert!(!out.is_empty(), "{args:?}: no report; stderr {err}");
    (code, serde_json::from_str(&out).unwrap())
}

#[test]
fn target_check_reports_zero_residual() {
    let (code, r) = structured(&["target", "check", "examples/cs_so3"]);
    assert_eq!(code, 0);
    assert_eq!(r["report"]["residual"], "0");
}

#[test]
fn non_poisson_target_exits_two() {
    let (code, r) = structured(&["target", "check", "psm_non_poisson"]);
    assert_eq!(code, 2);
    assert_eq!(r["verdicts"]["master_equation"], false);
}

#[test]
fn solid_torus_moduli_schema_and_dims() {
    let (code, r) = structured(&["moduli", "examples/solid_torus", "--theory", "cs"]);
    assert_eq!(code, 0);
    for key in ["moduli", "moduli_symp", "lefschetz", "evolution_relation"] {
        assert!(r["report"].get(key).is_some(), "missing key {key}");
    }
    let m = &r["report"]["moduli"];
    assert_eq!((m["1"].as_u64(), m["0"].as_u64()), (Some(1), Some(1)));
    assert!(m.get("-1").map_or(true, |v| v == 0) && m.get("-2").map_or(true, |v| v == 0));
    let b = &r["dims"]["boundary_moduli"];
    assert_eq!([&b["1"], &b["0"], &b["-1"]], [1, 2, 1]);
    assert_eq!(r["report"]["evolution_relation"]["lagrangian"], true);
}

#[test]
fn broken_orientation_is_an_input_error() {
    let (code, out, err) = bvbfv(&["complex", "check", "invalid/orientation_broken.json"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("IncoherentOrientation"), "{err}");
}

#[test]
fn malformed_inputs_never_panic() {
    let dir = std::env::temp_dir().join(format!("bvbfv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases = [
        ("garbage.json", "{ not json"),
        ("wrong_arity.json", r#"{"dimension": 2, "vertices": [0,1,2], "top_simplices": [[0,1]]}"#),
        ("unknown_vertex.json", r#"{"dimension": 1, "vertices": [0], "top_simplices": [[0,1]]}"#),
        ("bad_signs.json", r#"{"dimension": 1, "vertices": [0,1], "top_simplices": [[0,1]], "orientation_signs": [3]}"#),
    ];
    for (name, text) in cases {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        let (code, _, err) = bvbfv(&["complex", "check", p.to_str().unwrap()]);
        assert_eq!(code, 1, "{name}");
        assert!(err.starts_with("error["), "{name}: {err}");
        let (code, _, _) = bvbfv(&["target", "check", p.to_str().unwrap()]);
        assert_eq!(code, 1, "{name} as target");
    }
    assert_eq!(bvbfv(&["complex", "check", "no/such/file"]).0, 1);
    assert_eq!(bvbfv(&["moduli", "circle", "--theory", "scalar", "--mass", "x/0"]).0, 1);
    assert_eq!(bvbfv(&["moduli", "circle", "--theory", "cs"]).0, 1);
    assert_eq!(bvbfv(&["glue", "s3"]).0, 1);
    assert_eq!(bvbfv(&[]).0, 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn structured_output_is_byte_identical() {
    let args = ["glue", "cylinders", "--theory", "bf", "--format", "structured"];
    let a = bvbfv(&args);
    let b = bvbfv(&args);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn out_flag_writes_the_report() {
    let p = std::env::temp_dir().join(format!("bvbfv-out-{}.json", std::process::id()));
    let (code, out, _) = bvbfv(&["cme", "disk", "--theory", "bf", "--format", "structured", "--out", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(r["verdicts"]["master_equation"], true);
    std::fs::remove_file(p).unwrap();
}

#[test]
fn text_output_tabulates_dims() {
    let (code, out, _) = bvbfv(&["moduli", "torus", "--theory", "bf"]);
    assert_eq!(code, 0);
    let header = out.lines().find(|l| l.starts_with("ghost")).unwrap();
    assert_eq!(header.split_whitespace().collect::<Vec<_>>(), ["ghost", "1", "0", "-1", "-2"]);
    let row = out.lines().find(|l| l.starts_with("moduli ")).unwrap();
    assert_eq!(row.split_whitespace().skip(1).collect::<Vec<_>>(), ["1", "3", "3", "1"]);
}

/// Every run listed in the corpus manifest, with its expected exit code and dims.
#[test]
fn corpus_manifest() {
    let root = bvbfv::cli::corpus_root();
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(root.join("manifest.json")).unwrap()).unwrap();
    for (name, entry) in manifest["complexes"].as_object().unwrap() {
        let (code, r) = structured(&["complex", "check", entry["file"].as_str().unwrap()]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(r["report"]["counts"], entry["counts"], "{name} counts");
        assert_eq!(r["report"]["betti"], entry["betti"], "{name} betti");
        assert_eq!(r["report"]["closed"], entry["closed"], "{name} closed");
    }
    for run in manifest["runs"].as_array().unwrap() {
        let args: Vec<&str> = run["args"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
        let want = run["exit"].as_i64().unwrap() as i32;
        let mut all = args.clone();
        all.extend(["--format", "structured"]);
        let (code, out, err) = bvbfv(&all);
        assert_eq!(code, want, "{args:?}: {err}");
        if let Some(kind) = run.get("error").and_then(Value::as_str) {
            assert!(err.contains(kind), "{args:?}: {err}");
        }
        if let Some(dims) = run.get("dims").and_then(Value::as_object) {
            let r: Value = serde_json::from_str(&out).unwrap();
            for (table, expected) in dims {
                for (g, d) in expected.as_object().unwrap() {
                    let got = r["dims"][table].get(g).and_then(Value::as_u64).unwrap_or(0);
                    assert_eq!(got, d.as_u64().unwrap(), "{args:?} {table}[{g}]");
                }
            }
        }
    }
}
