use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liquid-drop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CUBE_OFF: &str = "OFF
8 12 0
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
3 0 2 1
3 0 3 2
3 4 5 6
3 4 6 7
3 0 1 5
3 0 5 4
3 1 2 6
3 1 6 5
3 2 3 7
3 2 7 6
3 3 0 4
3 3 4 7
";

#[test]
fn energy_report_embeds_metadata() {
    let out = run(&["energy", "--body", "ball", "--radius", "1", "--seed", "42"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["seed"], 42);
    assert_eq!(v["config"]["body"]["kind"], "ball");
    let d = v["report"]["coulomb"]["value"].as_f64().unwrap();
    assert!((d - 16.0 * std::f64::consts::PI.powi(2) / 15.0).abs() < 1e-12);
}

#[test]
fn csv_output_has_a_metadata_preamble() {
    let out = run(&[
        "energy",
        "--body",
        "ellipsoid",
        "--axes",
        "1,1,2",
        "--samples",
        "2000",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# liquid-drop "));
    assert_eq!(lines[1], "# seed: 0");
    assert!(lines[2].starts_with("# config: {"));
    assert!(lines[3].starts_with("body,method,volume"));
    assert_eq!(lines.len(), 5);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"body": {"kind": "ellipsoid", "semi_axes": [1, 1, 2]}, "samples": 3000, "seed": 5}"#,
    )
    .unwrap();
    let out = run(&["energy", "--config", path(&cfg), "--seed", "6"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["seed"], 6);
    assert_eq!(v["config"]["samples"], 3000);
    assert_eq!(v["report"]["body"], "ellipsoid");
}

#[test]
fn usage_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"sampels": 10}"#).unwrap();
    let out = run(&["energy", "--config", path(&cfg)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampels"));

    let out = run(&[
        "energy",
        "--body",
        "mesh",
        "--file",
        path(&dir.path().join("missing.off")),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&run(&["energy", "--body", "ball", "--samples", "0"])), 2);
    assert_eq!(code(&run(&["energy", "--bogus"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn mesh_from_off_file() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("cube.off");
    std::fs::write(&off, CUBE_OFF).unwrap();
    let out = run(&["energy", "--body", "mesh", "--file", path(&off), "--samples", "5000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!((v["report"]["volume"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["report"]["perimeter"]["value"].as_f64().unwrap() - 6.0).abs() < 1e-12);
}

#[test]
fn stationarity_check_sets_the_exit_code() {
    assert_eq!(
        code(&run(&["stationarity", "--body", "ball", "--radius", "0.5", "--check"])),
        0
    );
    let out = run(&["stationarity", "--body", "ellipsoid", "--axes", "1,1,2", "--check"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert!(v["report"]["stationarity"]["max_z"].as_f64().unwrap() > 3.0);
}

#[test]
fn proofcheck_verdicts() {
    let out = run(&["proofcheck", "--chain", "binding"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["report"][0]["chain"], "binding");
    assert!(v["report"][0]["flags"][0].as_str().unwrap().contains("3.836"));
    assert_eq!(
        code(&run(&["proofcheck", "--chain", "outer-min", "--volume", "0.5"])),
        0
    );
    assert_eq!(
        code(&run(&["proofcheck", "--chain", "roundness", "--radius", "0.5"])),
        0
    );
    assert_eq!(code(&run(&["proofcheck", "--chain", "outer-min", "--volume", "2"])), 1);
}

#[test]
fn sweep_writes_csv_with_seed_column() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--check",
        "two-ball",
        "--volumes",
        "3:4:0.1",
        "--seed",
        "3",
        "--output",
        path(&file),
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("3.5120719"));
    let text = std::fs::read_to_string(&file).unwrap();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "seed"));
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| &r[headers.len() - 1] == "3"));
}

#[test]
fn flow_writes_trajectory_and_final_shape() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("traj.csv");
    let out = run(&[
        "flow",
        "--max-steps",
        "3",
        "--format",
        "csv",
        "--output",
        path(&file),
        "--seed",
        "9",
    ]);
    assert_eq!(code(&out), 1, "max steps is a failed verification");
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.contains("step,energy,volume,asphericity,step_size,gradient_norm"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    let final_doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("traj.final.json")).unwrap()).unwrap();
    assert_eq!(final_doc["seed"], 9);
    assert_eq!(final_doc["version"], env!("CARGO_PKG_VERSION"));
    assert!(final_doc["R"].as_f64().unwrap() > 0.0);
    let c20 = final_doc["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["l"] == 2 && c["m"] == 0)
        .unwrap()["c"]
        .as_f64()
        .unwrap();
    assert!(c20 > 0.0 && c20 < 0.1);

    let out = run(&["flow", "--body", "ball", "--radius", "0.7"]);
    assert_eq!(code(&out), 0, "a ball is already critical");
}

#[test]
fn worker_count_does_not_change_output() {
    let args = |w: &'static str| {
        [
            "energy",
            "--body",
            "star",
            "--coeff",
            "2,0,0.2",
            "--samples",
            "20000",
            "--workers",
            w,
        ]
    };
    let a = json(&run(&args("1")));
    let b = json(&run(&args("3")));
    assert_eq!(a["report"], b["report"]);
}
