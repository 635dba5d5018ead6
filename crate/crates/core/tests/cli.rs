use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-zeta"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn assert_schema(name: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{name}: {msgs:?}");
}

#[test]
fn det_on_dirichlet_interval() {
    let v = stdout_json(&run(&["det", "--model", "dirichlet", "--length", "3.141592653589793"]));
    assert_schema("det.schema.json", &v);
    assert!((v["zeta0"].as_f64().unwrap() + 0.5).abs() < 1e-6);
    assert!((v["zeta_prime0"].as_f64().unwrap() + 1.837877).abs() < 1e-6);
    assert!((v["det"].as_f64().unwrap() - 6.283185).abs() < 1e-6);
}

#[test]
fn eval_explicit_spectrum() {
    let v = stdout_json(&run(&["eval", "--model", "explicit", "--eigenvalues", "1,2,3", "--s", "1,-0.5"]));
    assert_schema("eval.schema.json", &v);
    assert!((v[0]["value"].as_f64().unwrap() - 1.8333333333333333).abs() < 1e-12);
    let want = 1.0 + 2f64.sqrt() + 3f64.sqrt();
    assert!((v[1]["value"].as_f64().unwrap() - want).abs() < 1e-8);
    assert_eq!(v[1]["lattice_offset_used"], true);
}

#[test]
fn residues_and_kernel_table_validate() {
    let v = stdout_json(&run(&["residues", "--model", "dirichlet", "--k", "0..3"]));
    assert_schema("residues.schema.json", &v);
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert!((v[0]["residue"].as_f64().unwrap() - 0.5).abs() < 1e-8);

    let v = stdout_json(&run(&["kernel-table", "--model", "dirichlet", "--m", "1", "--format", "json"]));
    assert_schema("kernel_table.schema.json", &v);
    assert_eq!(v["m"], 1);
}

#[test]
fn verify_rows_validate() {
    let v = stdout_json(&run(&["verify"]));
    assert_schema("verify.schema.json", &v);
    let rows = v.as_array().unwrap();
    for r in rows {
        let variant = r["variant"].as_str().unwrap();
        if ["s0", "spos", "sneg_derived", "xi_beta_identity"].contains(&variant) {
            assert_eq!(r["pass"], true, "{r}");
        }
    }
}

#[test]
fn kernel_table_csv_format() {
    let out = run(&["kernel-table", "--model", "dirichlet", "--tau", "0.1,1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.split('\n').collect();
    assert_eq!(lines[0], "tau,value,modes,trunc_bound");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3], "");
    assert!(!text.contains('\r'));
    let fields: Vec<&str> = lines[2].split(',').collect();
    // 17 significant digits in scientific notation
    let mantissa = fields[1].trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17, "{}", fields[1]);
    assert_eq!(fields[0].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn output_is_deterministic() {
    let args = ["eval", "--model", "dirichlet", "--s", "-0.5,0.25,2", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("matrix.txt");
    let mut text = String::new();
    for i in 0..20 {
        if i < 19 {
            text.push_str("2 -1\n");
        } else {
            text.push_str("2\n");
        }
    }
    std::fs::write(&matrix, text).unwrap();
    let config = dir.path().join("job.json");
    std::fs::write(
        &config,
        r#"{"command": "eval",
            "model": {"n": 1, "h": 2, "spectrum": {"kind": "tridiagonal_file", "path": "matrix.txt"}},
            "s": [3.0]}"#,
    )
    .unwrap();
    let out_path = dir.path().join("out.json");
    let out = run(&[
        "eval",
        "--config",
        config.to_str().unwrap(),
        "--s",
        "0.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_schema("eval.schema.json", &v);
    assert_eq!(v[0]["s"], 0.5);
    // eigenvalues 2 − 2cos(jπ/21)
    let want: f64 = (1..=20)
        .map(|j| (2.0 - 2.0 * (j as f64 * std::f64::consts::PI / 21.0).cos()).powf(-0.5))
        .sum();
    assert!((v[0]["value"].as_f64().unwrap() / want - 1.0).abs() < 1e-10);
    assert_eq!(v[0]["model"], "tridiagonal_matrix");
}

#[test]
fn printed_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "residues",
        "--model",
        "known-sequence",
        "--c",
        "1",
        "--p",
        "2",
        "--k",
        "0,2",
        "--theta",
        "50",
        "--print-config",
    ]);
    assert!(out.status.success());
    let first = out.stdout.clone();
    let path = dir.path().join("job.json");
    std::fs::write(&path, &first).unwrap();
    let again = run(&["residues", "--config", path.to_str().unwrap(), "--print-config"]);
    assert_eq!(again.stdout, first);
}

#[test]
fn exit_codes() {
    // malformed config: 1, naming the field
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"command\": \"eval\",\n\"modle\": {}}").unwrap();
    let out = run(&["eval", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("modle") && err.contains("line 2"), "{err}");
    // unknown flag and missing file: 1
    assert_eq!(run(&["eval", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["det", "--model", "tridiagonal", "--file", "/nonexistent/m.txt"]).status.code(), Some(1));
    // domain: 2 (pole, invalid model)
    assert_eq!(run(&["eval", "--model", "dirichlet", "--s", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["det", "--model", "dirichlet", "--length", "-1"]).status.code(), Some(2));
    // budget: 3
    let out = run(&["eval", "--model", "dirichlet", "--s", "0.2", "--budget", "50"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("best value"));
}
