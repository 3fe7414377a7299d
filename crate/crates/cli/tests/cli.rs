//! End-to-end tests of the binary: exit codes, output files, determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mwce"))
}

#[test]
fn run_flat_cylinder_pipeline() {
    let dir = tempdir("run1");
    let status = bin()
        .args([
            "run",
            "--model",
            "flat_cylinder",
            "--L",
            "2",
            "--circ",
            "1",
            "--p",
            "0",
            "--a",
            "1,2,3",
            "--res",
            "16",
            "--out",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    for f in [
        "mesh_summary.txt",
        "rank_table.csv",
        "scattering_report_p0.json",
        "q_inverse_p0.csv",
        "bound_report_p0.json",
    ] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    let report = std::fs::read_to_string(dir.join("scattering_report_p0.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    let eigs = v["eigenvalues"].as_array().unwrap();
    for e in eigs {
        assert!((e.as_f64().unwrap() - 2.0).abs() < 1e-6);
    }
}

#[test]
fn corrupted_mesh_exits_3_without_outputs() {
    let dir = tempdir("badmesh");
    let mesh = dir.join("bad.mwce");
    std::fs::write(&mesh, "mwce-mash 1 2\n").unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["run", "--mesh"])
        .arg(&mesh)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    assert!(!out.join("scattering_report_p0.json").exists());
}

#[test]
fn config_errors_exit_2() {
    let status = bin()
        .args(["scatlen", "--model", "disk", "--a", "2,1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["run", "--model", "klein_bottle"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempdir("cfg");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "model = flat_cylinder\nlength = 2\ncircumference = 1\nres = 8\na = 1,2,3\n# comment\np = 0\n").unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["scatlen", "--config"])
        .arg(&cfg)
        .args(["--res", "12", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("scattering_report_p0.json").exists());
}

#[test]
fn csv_output_bit_identical_across_runs() {
    let d1 = tempdir("det1");
    let d2 = tempdir("det2");
    for d in [&d1, &d2] {
        let status = bin()
            .args([
                "run", "--model", "annulus", "--r-inner", "1", "--r-outer", "2", "--p", "0",
                "--a", "0.5,1.0,1.5", "--res", "12", "--out",
            ])
            .arg(d)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in ["rank_table.csv", "q_inverse_p0.csv", "scattering_report_p0.json"] {
        let a = std::fs::read(d1.join(f)).unwrap();
        let b = std::fs::read(d2.join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn fit_failures_exit_5() {
    // an unattainable slope tolerance turns the fit into an audit failure
    let status = bin()
        .args([
            "scatlen", "--model", "flat_cylinder", "--res", "8", "--a", "1,2,3",
            "--slope-tol", "1e-18",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(5));
}

#[test]
fn modes_grid_and_oracle() {
    let dir = tempdir("modes");
    let output = bin()
        .args(["modes", "--segments", "1x2,1x1", "--grid", "10", "--lambda-max", "3", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("t1 = 2"), "oracle line missing: {text}");
    let csv = std::fs::read_to_string(dir.join("modes_grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn mesh_roundtrip_through_file() {
    // write a model mesh, read it back through --mesh
    let dir = tempdir("roundtrip");
    let (m, _) = mwce_core::generate_model(
        &mwce_core::ModelSpec::FlatCylinder { length: 1.0, circumference: 1.0 },
        8,
    )
    .unwrap();
    let path = dir.join("cyl.mwce");
    mwce_core::complex::meshio::write_mesh_file(&m, &path).unwrap();
    let status = bin()
        .args(["mesh-info", "--mesh"])
        .arg(&path)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(dir.join("mesh_summary.txt")).unwrap();
    assert!(summary.contains("volume 1"), "{summary}");
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("mwce-cli-test-{tag}-{}", std::process::id()));
    if Path::new(&dir).exists() {
        let _ = std::fs::remove_dir_all(&dir);
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
