use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn patchfront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patchfront"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const SET_A: [&str; 8] = ["--r1", "1", "--r2", "9", "--r3", "1", "--lambda1", "-4"];

fn with_set_a(extra: &[&'static str]) -> Vec<&'static str> {
    let mut v = SET_A.to_vec();
    v.extend_from_slice(extra);
    v
}

#[test]
fn predict_locked_example() {
    let mut args = vec!["predict"];
    args.extend(with_set_a(&["--cA", "3"]));
    let out = patchfront(&args);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["regime"], "Locked");
    assert_eq!(v["c_star"], 3.0);
}

#[test]
fn predict_sweep_is_csv() {
    let mut args = vec!["predict"];
    args.extend(with_set_a(&["--sweep", "1:7:7"]));
    let out = patchfront(&args);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "cA,regime,c_star");
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[1], "1.0,Slow,2.0");
    assert_eq!(lines[3], "3.0,Locked,3.0");
    assert!(lines[5].starts_with("5.0,NonlocallyPulled,2.0701186"));
    assert_eq!(lines[7], "7.0,Fast,2.0");
}

#[test]
fn eigen_particular_value() {
    // the closed-form length reproduces -77/13 to rounding
    let exact = format!("{}", std::f64::consts::FRAC_PI_2 * (13.0f64 / 40.0).sqrt());
    let out = patchfront(&[
        "eigen", "--r1", "1", "--r2", "9", "--r3", "4", "--L", &exact,
    ]);
    assert_eq!(code(&out), 0);
    let lam = json(&out)["lambda1"].as_f64().unwrap();
    assert!((lam + 77.0 / 13.0).abs() < 1e-9, "{lam}");
    // the six-digit length lands within 1e-3
    let out = patchfront(&[
        "eigen", "--r1", "1", "--r2", "9", "--r3", "4", "--L", "0.895353",
    ]);
    let lam = json(&out)["lambda1"].as_f64().unwrap();
    assert!((lam + 5.923077).abs() < 1e-3, "{lam}");
}

#[test]
fn eigen_numeric_and_eigenfunction_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("phi.csv");
    let out = patchfront(&[
        "eigen",
        "--r1",
        "1",
        "--r2",
        "9",
        "--r3",
        "4",
        "--L",
        "1",
        "--numeric",
        "--emit-eigenfunction",
        file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let numeric = json(&out)["lambda1"].as_f64().unwrap();
    let exact = json(&patchfront(&[
        "eigen", "--r1", "1", "--r2", "9", "--r3", "4", "--L", "1",
    ]))["lambda1"]
        .as_f64()
        .unwrap();
    assert!((numeric - exact).abs() < 1e-4);
    let text = fs::read_to_string(file).unwrap();
    assert!(text.starts_with("y,phi,dphi\n"));
    let at_zero = text.lines().find(|l| l.starts_with("0.0,")).unwrap();
    assert!(at_zero.starts_with("0.0,1.0,"), "{at_zero}");
}

#[test]
fn missing_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = patchfront(&[
        "--out-dir",
        out_dir.to_str().unwrap(),
        "simulate",
        "--config",
        "missing.json",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
    assert!(!out_dir.exists(), "no output on failure");
}

#[test]
fn bad_usage_exits_with_one() {
    assert_eq!(code(&patchfront(&["bogus"])), 1);
    assert_eq!(code(&patchfront(&["predict", "--r1", "1"])), 1);
    assert_eq!(
        code(&patchfront(&[
            "predict", "--r1", "x", "--r2", "9", "--r3", "1", "--L", "1", "--cA", "1"
        ])),
        1
    );
    // both L and lambda1
    let mut args = vec!["predict", "--L", "1"];
    args.extend(with_set_a(&["--cA", "3"]));
    assert_eq!(code(&patchfront(&args)), 1);
    // eigenvalue outside (-r2, -max(r1, r3))
    let out = patchfront(&[
        "eigen",
        "--r1",
        "1",
        "--r2",
        "9",
        "--r3",
        "1",
        "--lambda1",
        "-0.5",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&patchfront(&["--help"])), 0);
}

#[test]
fn malformed_scenarios_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        (
            "unknown_type.json",
            r#"{"r1":1,"r2":9,"r3":1,"L":1,"trajectory":{"type":"zigzag","cA":1}}"#,
        ),
        (
            "no_length.json",
            r#"{"r1":1,"r2":9,"r3":1,"trajectory":{"type":"linear","cA":1}}"#,
        ),
        (
            "bad_switches.json",
            r#"{"r1":1,"r2":9,"r3":1,"L":1,"trajectory":{"type":"slow_oscillation","cA1":4.5,"cA2":5,"switch_times":[5,2]}}"#,
        ),
        ("not_json.json", "r1 = 1"),
    ] {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let out = patchfront(&["simulate", "--config", path.to_str().unwrap(), "--T", "1"]);
        assert_eq!(
            code(&out),
            1,
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let mut args = vec!["--out-dir", blocker.to_str().unwrap(), "predict"];
    args.extend(with_set_a(&["--cA", "3"]));
    assert_eq!(code(&patchfront(&args)), 2);
}

fn scenario(dir: &Path) -> String {
    let path = dir.join("scenario.json");
    fs::write(
        &path,
        r#"{"r1": 1, "r2": 9, "r3": 1, "lambda1": -4,
            "trajectory": {"type": "slow_oscillation", "cA1": 4.5, "cA2": 5, "switch_times": [5, 10]}}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

fn check_manifest(dir: &Path) -> serde_json::Value {
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    for (name, digest) in manifest["outputs"].as_object().unwrap() {
        let bytes = fs::read(dir.join(name)).unwrap();
        assert_eq!(
            digest.as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes)),
            "{name}"
        );
    }
    manifest
}

#[test]
fn simulate_writes_trace_profiles_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path());
    let out_dir = dir.path().join("run");
    let out = patchfront(&[
        "--out-dir",
        out_dir.to_str().unwrap(),
        "simulate",
        "--config",
        &cfg,
        "--T",
        "10",
        "--emit-profile-every",
        "500",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = check_manifest(&out_dir);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(
        manifest["config"]["resolved"]["scenario"]["trajectory"]["type"],
        "slow_oscillation"
    );
    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,front_x\n"));
    assert_eq!(trace.lines().count(), 22);
    let profiles = fs::read_to_string(out_dir.join("profiles.csv")).unwrap();
    let times: std::collections::BTreeSet<&str> = profiles
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(times.len(), 3);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path());
    let runs: [&[&str]; 4] = [
        &["simulate", "--config", &cfg, "--T", "10"],
        &[
            "optimize", "--r1", "1", "--h", "8", "--A", "4", "--W", "2", "--cells", "8",
            "--starts", "3",
        ],
        &[
            "verify",
            "interface",
            "--r1",
            "1",
            "--r2",
            "9",
            "--r3",
            "1",
            "--lambda1",
            "-4",
            "--cA",
            "5",
            "--nt",
            "11",
        ],
        &[
            "predict",
            "--r1",
            "1",
            "--r2",
            "9",
            "--r3",
            "1",
            "--lambda1",
            "-4",
            "--sweep",
            "0.5:8:16",
        ],
    ];
    for (k, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out_dir = dir.path().join(format!("run{k}_{rep}"));
            let mut full = vec!["--out-dir", out_dir.to_str().unwrap()];
            full.extend_from_slice(args);
            let out = patchfront(&full);
            assert_eq!(
                code(&out),
                0,
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let mut manifest = check_manifest(&out_dir);
            manifest.as_object_mut().unwrap().remove("timestamp");
            outputs.push((out.stdout, manifest));
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}
