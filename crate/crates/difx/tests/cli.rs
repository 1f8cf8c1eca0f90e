//! End-to-end CLI tests: subcommand plumbing, file outputs, exit codes.

use std::path::Path;
use std::process::Command;

use difx::scene::{desk_scene, scene_to_json};
use tempfile::tempdir;

fn difx_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_difx"))
}

fn write_micro_scene(dir: &Path) -> std::path::PathBuf {
    let mut scene = desk_scene();
    scene.resolution = (128, 72);
    scene.render.photon_count = 80_000;
    scene.render.gather_k = 25;
    let path = dir.join("scene.json");
    std::fs::write(&path, scene_to_json(&scene)).unwrap();
    path
}

#[test]
fn render_diff_estimate_roundtrip() {
    let dir = tempdir().unwrap();
    let scene = write_micro_scene(dir.path());
    let p1 = dir.path().join("p1.difx.f32");
    let p2 = dir.path().join("p2.difx.f32");
    let ppm = dir.path().join("p1.ppm");

    let status = difx_bin()
        .args(["render", "--config"])
        .arg(&scene)
        .args(["--present", "--seed", "7", "--out"])
        .arg(&p1)
        .arg("--ppm")
        .arg(&ppm)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let status = difx_bin()
        .args(["render", "--config"])
        .arg(&scene)
        .args(["--absent", "--seed", "7", "--out"])
        .arg(&p2)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let d = dir.path().join("d.difx.f32");
    let mask = dir.path().join("mask.pbm");
    let status = difx_bin()
        .arg("diff")
        .arg("--a")
        .arg(&p1)
        .arg("--b")
        .arg(&p2)
        .arg("--out")
        .arg(&d)
        .arg("--mask")
        .arg(&mask)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(difx::raster::read_pbm(&mask).unwrap().popcount() > 0);
    let diff_img = difx::raster::read_rawf32(&d).unwrap();
    assert_eq!(diff_img.width(), 128);

    let report_path = dir.path().join("report.json");
    let status = difx_bin()
        .arg("estimate")
        .arg("--a")
        .arg(&p1)
        .arg("--b")
        .arg(&p2)
        .arg("--out")
        .arg(&report_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: difx::estimate::EstimateReport =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(!report.no_signal);
    assert!(report.width_rms_px.unwrap() > 0.0);

    // PPM output exists and parses.
    assert!(difx::raster::read_ppm16(&ppm).is_ok());
}

#[test]
fn estimate_of_identical_pair_exits_3_and_writes_report() {
    let dir = tempdir().unwrap();
    let scene = write_micro_scene(dir.path());
    let p2 = dir.path().join("p2.difx.f32");
    difx_bin()
        .args(["render", "--config"])
        .arg(&scene)
        .args(["--absent", "--out"])
        .arg(&p2)
        .status()
        .unwrap();
    let report_path = dir.path().join("report.json");
    let status = difx_bin()
        .arg("estimate")
        .arg("--a")
        .arg(&p2)
        .arg("--b")
        .arg(&p2)
        .arg("--out")
        .arg(&report_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    let report: difx::estimate::EstimateReport =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report.no_signal);
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"mystery\": 1}").unwrap();
    let status = difx_bin()
        .args(["render", "--config"])
        .arg(&bad)
        .args(["--present", "--out"])
        .arg(dir.path().join("x.difx.f32"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Out-of-range field caught by validation, same exit code.
    let mut scene = desk_scene();
    scene.ground_color.r = 1.5;
    let invalid = dir.path().join("invalid.json");
    std::fs::write(&invalid, scene_to_json(&scene)).unwrap();
    let status = difx_bin()
        .args(["render", "--config"])
        .arg(&invalid)
        .args(["--present", "--out"])
        .arg(dir.path().join("x.difx.f32"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_input_exits_4() {
    let dir = tempdir().unwrap();
    let status = difx_bin()
        .arg("diff")
        .arg("--a")
        .arg(dir.path().join("nope.difx.f32"))
        .arg("--b")
        .arg(dir.path().join("nope2.difx.f32"))
        .arg("--out")
        .arg(dir.path().join("d.difx.f32"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn bad_sweep_arguments_exit_2() {
    let dir = tempdir().unwrap();
    let status = difx_bin()
        .args(["sweep", "--param", "colour", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = difx_bin()
        .args(["sweep", "--param", "width", "--snr", "25,banana", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn sweep_and_report_produce_table_and_figures() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("sweep-out");
    let cache = dir.path().join("shared-cache");
    let status = difx_bin()
        .env("DIFX_CACHE_DIR", &cache)
        .args(["sweep", "--param", "green", "--preset", "desk"])
        .args(["--snr", "inf", "--seed", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let csv = out.join("sweep.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 9, "header + 8 rows");
    assert!(std::fs::metadata(out.join("sweep.json")).unwrap().len() > 0);
    let svg = std::fs::read_to_string(out.join("fig.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);

    // The cache honored DIFX_CACHE_DIR and holds 8 present + 1 absent files.
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 9);
    assert!(!out.join("cache").exists());

    let fig2 = out.join("fig2.svg");
    let status = difx_bin()
        .args(["report", "--table"])
        .arg(&csv)
        .arg("--out")
        .arg(&fig2)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let svg2 = std::fs::read_to_string(&fig2).unwrap();
    assert_eq!(svg2.matches("<polyline").count(), 1);
}
