mod common;

use std::path::Path;
use std::process::{Command, Output};

use gts_core::distsim::ThroughputRecord;
use serde_json::Value;

fn gtt(args: &[&str]) -> Output {
    gtt_env(args, &[])
}

fn gtt_env(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gtt"));
    cmd.args(args).env_remove("GTT_LOG_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_or_missing_subcommand_prints_usage_and_exits_1() {
    for args in [&["frobnicate"][..], &[], &["scale", "--no-such-flag"]] {
        let o = gtt(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains("Usage"), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_lists_every_subcommand() {
    let o = gtt(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["render", "measure", "scale", "simulate", "sweep", "serve", "analyze", "selftest"] {
        assert!(stdout(&o).contains(sub), "{sub}");
        assert_eq!(gtt(&[sub, "--help"]).status.code(), Some(0), "{sub}");
    }
}

#[test]
fn scale_reports_the_reference_figures() {
    let args = ["scale", "--seconds-per-frame", "7200", "--fps", "30", "--gflops", "4.8", "--efficiency", "0.5"];
    let o = gtt(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for needle in ["216000", "1036.8", "518.4", "432000", "BlueGeneL", "-237.8"] {
        assert!(text.contains(needle), "{needle} missing from\n{text}");
    }
    let mut json_args = args.to_vec();
    json_args.push("--json");
    let o = gtt(&json_args);
    let rec: ThroughputRecord = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec.n_processors, Some(216_000));
    assert!((rec.sustained_tflops - 518.4).abs() < 1e-9 * 518.4);
}

#[test]
fn invalid_values_exit_1() {
    for args in [
        &["scale", "--fps", "0"][..],
        &["scale", "--efficiency", "1.5"],
        &["simulate", "--machine", "Cray-9"],
        &["render", "--preset", "teapot", "--out", "/tmp/never.ppm"],
        &["sweep", "--parameter", "voltage", "--grid", "1"],
        &["selftest", "--trials", "0"],
    ] {
        let o = gtt(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error"), "{args:?}");
    }
}

#[test]
fn simulate_json_shares_the_scale_schema() {
    let o = gtt(&["simulate", "--machine", "Cluster-256GPU", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec: ThroughputRecord = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec.n_processors, Some(256));
    assert!(rec.efficiency > 0.0 && rec.efficiency <= 1.0);

    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.jsonl");
    let o = gtt(&["simulate", "--machine", "qcdoc", "--tiles", "24576", "--events", events.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not interactive"));
    let lines = std::fs::read_to_string(&events).unwrap();
    let times: Vec<f64> =
        lines.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()["time"].as_f64().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn sweep_writes_csv_with_error_rows() {
    let o = gtt(&["sweep", "--machine", "Cluster-256GPU", "--parameter", "latency", "--grid", "0,1e-6,abc,-1,1e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "parameter,frame_time_s,achieved_fps,peak_tflops,sustained_tflops,efficiency,error"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[2][1].is_empty() && !rows[2][6].is_empty());
    assert!(!rows[3][6].is_empty());
    let eff: Vec<f64> = [0, 1, 4].iter().map(|&i| rows[i][5].parse().unwrap()).collect();
    assert!(eff.windows(2).all(|w| w[1] <= w[0]), "{eff:?}");
}

#[test]
fn render_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    for (path, workers) in [(&a, "1"), (&b, "4")] {
        let o = gtt(&[
            "render",
            "--width",
            "16",
            "--height",
            "12",
            "--spp",
            "4",
            "--workers",
            workers,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(std::fs::read(&a).unwrap().starts_with(b"P6\n16 12\n255\n"));
}

#[test]
fn render_reads_scene_files() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gts_core::render::SceneFile::new(
        &gts_core::render::presets::furnace(),
        gts_core::render::presets::furnace_camera(8, 8),
        Some(gts_core::render::RenderConfig::new(2, 4, 9)),
    );
    let path = dir.path().join("scene.toml");
    std::fs::write(&path, scene.to_toml()).unwrap();
    let out = dir.path().join("f.png");
    let o = gtt(&["render", "--scene", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("8x8, 2 spp, depth 4, seed 9"));
    assert!(out.exists());
}

#[test]
fn measure_extrapolates_from_this_machine() {
    let o = gtt(&[
        "measure",
        "--width",
        "8",
        "--height",
        "8",
        "--spp",
        "2",
        "--repetitions",
        "1",
        "--gflops",
        "10",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec: ThroughputRecord = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rec.n_processors.unwrap() >= 1);
}

#[test]
fn analyze_empty_log_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtt(&["analyze", "--log", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no sessions"));
    // Same through the environment override.
    let o = gtt_env(&["analyze"], &[("GTT_LOG_DIR", dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no sessions"));
    std::fs::write(dir.path().join("sessions.jsonl"), "").unwrap();
    assert_eq!(gtt(&["analyze", "--log", dir.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn analyze_matches_selftest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = gtt(&["selftest", "--out-dir", d, "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let o = gtt_env(&["analyze", "--json"], &[("GTT_LOG_DIR", dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows[0]["result"], report["result"]);
    let o = gtt(&["analyze", "--log", &format!("{d}/sessions.jsonl")]);
    assert!(stdout(&o).contains("absence of evidence of discrimination at alpha"));
    let o = gtt(&["analyze", "--log", d, "--session", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn corrupt_log_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sessions.jsonl"), "not json\n").unwrap();
    let o = gtt(&["analyze", "--log", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn selftest_calibration_summary() {
    let o = gtt(&["selftest", "--observer-accuracy", "0.5", "--seeds", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("calibration")).unwrap();
    let fraction: f64 = line.split(" = ").nth(3).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!((fraction - 0.95).abs() <= 0.05, "{line}");
}

#[test]
fn serve_rejects_a_bad_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtt(&["serve", "--manifest", dir.path().join("none.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let manifest = common::manifest_dir(dir.path());
    let o = gtt(&["serve", "--manifest", manifest.to_str().unwrap(), "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(1));
}
