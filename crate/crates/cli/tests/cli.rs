//! End-to-end tests of the `hopsim` binary: exit codes, artifact layout,
//! determinism, and the validate report.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hopsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hopsim"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    hopsim().args(args).output().expect("binary runs")
}

fn repo_configs_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn empty_config_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "empty.json", "");
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "survey",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_dir.exists(), "no partial outputs may be written");
}

#[test]
fn parse_error_reports_line_and_column() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "broken.json", "{\n  \"kind\": \"survey\",\n  oops\n}");
    let out = run(&["survey", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "diagnostics should carry the line: {stderr}");
}

#[test]
fn invalid_motor_fails_validation_with_named_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad_motor.json",
        r#"{
            "kind": "motor-burn",
            "motor": {
                "grain_inner_radius": 0.02,
                "grain_outer_radius": 0.018,
                "grain_length": 0.015,
                "throat_radius": 0.002,
                "nozzle_exit_radius": 0.008,
                "propellant_density": 1750.0,
                "burn_rate_coefficient": 1.7e-4,
                "burn_rate_exponent": 0.3,
                "characteristic_velocity": 1470.0,
                "ambient_pressure": 600.0
            }
        }"#,
    );
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("motor.grain_inner_radius"), "report: {stdout}");

    // Running it fails with exit 3 and writes nothing.
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "motor-burn",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out_dir.exists());
}

#[test]
fn overlapping_obstacles_violation_cites_the_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "overlap.json",
        r#"{
            "kind": "plan-path",
            "world": {
                "obstacles": [
                    { "center": [0.0, 0.0], "radius": 0.3 },
                    { "center": [0.2, 0.0], "radius": 0.3 }
                ],
                "goal": [-0.9, 0.0],
                "workspace_radius": 1.0,
                "kappa": 5
            }
        }"#,
    );
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("world.obstacles[0]/world.obstacles[1]"),
        "report should cite the overlapping pair: {stdout}"
    );
}

#[test]
fn shipped_configs_validate_clean() {
    let dir = repo_configs_dir();
    let mut checked = 0;
    for entry in fs::read_dir(&dir).expect("configs/ exists") {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let out = run(&["validate", "--config", path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{} failed validation: {}",
            path.display(),
            String::from_utf8_lossy(&out.stdout)
        );
        checked += 1;
    }
    assert!(checked >= 8, "expected the full set of shipped configs, found {checked}");
}

#[test]
fn kind_mismatch_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "survey.json", r#"{ "kind": "survey" }"#);
    let out = run(&["hop", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does not match"), "stderr: {stderr}");
}

#[test]
fn same_seed_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.json",
        r#"{
            "kind": "plan-path",
            "grid_n": 60,
            "sweep_starts": 8,
            "seed": 7
        }"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run(&[
            "plan-path",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            "7",
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["contour.csv", "path.csv", "summary.json"] {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
}

#[test]
fn plan_path_reference_world_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "plan-path",
        "--reference-world",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], serde_json::Value::Bool(true));
    assert!(summary["closest_obstacle_clearance_m"].as_f64().unwrap() > 0.0);
    assert!(out_dir.join("contour.csv").exists());
    assert!(out_dir.join("path.csv").exists());
}

#[test]
fn tables_which_3_emits_only_table3() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["tables", "--which", "3", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("table3.csv").exists());
    assert!(!out_dir.join("table2.csv").exists());
    assert!(!out_dir.join("table4.csv").exists());

    let csv = fs::read_to_string(out_dir.join("table3.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("name,oxidizer,family,"));
    // Every liquid row stays within 10% on Isp and 15% on flight time.
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let isp_rel: f64 = cols[7].parse().unwrap();
        let time_rel: f64 = cols[10].parse().unwrap();
        assert!(isp_rel.abs() < 0.10, "row {line}");
        assert!(time_rel.abs() < 0.15, "row {line}");
    }
}

#[test]
fn table4_has_exact_interface_header_and_24_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["tables", "--which", "4", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(out_dir.join("table4.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "resolution,camera_range_m,cave_length_m,robots,map_time_min,paper_time_min,relative_error"
    );
    assert_eq!(lines.count(), 24);
}

#[test]
fn batch_mode_fans_out_to_isolated_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "short.json", r#"{ "kind": "survey", "cave": {"length_m": 250.0} }"#);
    let b = write_config(tmp.path(), "long.json", r#"{ "kind": "survey", "cave": {"length_m": 2000.0} }"#);
    let out_dir = tmp.path().join("batch");
    let out = run(&[
        "survey",
        "--config",
        a.to_str().unwrap(),
        "--config",
        b.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let short: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("short/summary.json")).unwrap()).unwrap();
    let long: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("long/summary.json")).unwrap()).unwrap();
    assert_eq!(short["robots_required"], serde_json::json!(11));
    assert_eq!(long["robots_required"], serde_json::json!(69));
}

#[test]
fn batch_exit_code_is_the_worst_of_the_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write_config(tmp.path(), "good.json", r#"{ "kind": "survey" }"#);
    let bad = write_config(
        tmp.path(),
        "bad.json",
        r#"{ "kind": "survey", "cave": {"length_m": -5.0} }"#,
    );
    let out_dir = tmp.path().join("batch");
    let out = run(&[
        "survey",
        "--config",
        good.to_str().unwrap(),
        "--config",
        bad.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    // The good scenario still produced artifacts; the bad one did not.
    assert!(out_dir.join("good/summary.json").exists());
    assert!(!out_dir.join("bad").exists());
}

#[test]
fn hop_trajectory_has_the_interface_header() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["hop", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with(
        "t,x,y,z,vx,vy,vz,roll,pitch,yaw,wx,wy,wz,ww1,ww2,ww3,mass,thrust,tau_x,tau_y,tau_z\n"
    ));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["burn_truncated"], serde_json::Value::Bool(false));
}

#[test]
fn attitude_default_scenario_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["attitude", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], serde_json::Value::Bool(true));
}

#[test]
fn relay_uses_shipped_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["relay", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["hops"], serde_json::json!(35));
    let latency = summary["end_to_end_latency_s"].as_f64().unwrap();
    assert!((latency - 35.175).abs() < 1e-9);
}
