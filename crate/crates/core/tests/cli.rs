//! End-to-end tests of the `losscape` binary: exit codes, file outputs,
//! config merging, and byte determinism.

use losscape::llg;
use losscape::sampler::LandscapeGrid;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::tempdir;

fn losscape(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_losscape"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_double_well(path: &Path) {
    let grid = LandscapeGrid::from_values(&[5], vec![0.0, 2.0, 1.0, 2.0, 0.0]).unwrap();
    llg::write_llg(&grid, path).unwrap();
}

#[test]
fn sample_writes_the_eleven_by_eleven_grid() {
    let dir = tempdir().unwrap();
    let out = losscape(
        &["sample", "--fn", "quadratic", "--dims", "2", "--range", "0.5", "--steps", "11", "-o", "grid.llg"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = llg::read_llg(&dir.path().join("grid.llg")).unwrap();
    assert_eq!(grid.shape(), &[11, 11]);
    assert_eq!(grid.axes()[0].first(), Some(&-0.5));
    assert_eq!(grid.axes()[0].last(), Some(&0.5));
    assert!(grid.meta.oracle_id.as_deref().unwrap().starts_with("quadratic"));
}

#[test]
fn spectrum_reports_diagonal_eigenvalues() {
    let dir = tempdir().unwrap();
    let out = losscape(
        &["spectrum", "--fn", "quadratic-diag-5-2-1", "--k", "2", "-o", "spec.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spec.json")).unwrap()).unwrap();
    let eig = doc["eigenvalues"].as_array().unwrap();
    assert!((eig[0].as_f64().unwrap() - 5.0).abs() < 1e-8);
    assert!((eig[1].as_f64().unwrap() - 2.0).abs() < 1e-8);
    // Eigenvector sidecars alongside.
    let (vec0, sidecar0) = llg::read_vector(&dir.path().join("spec.eig0.f64")).unwrap();
    assert_eq!(vec0.len(), 3);
    assert!((sidecar0["eigenvalue"].as_f64().unwrap() - 5.0).abs() < 1e-8);
}

#[test]
fn analyze_double_well_reports_a_quarter() {
    let dir = tempdir().unwrap();
    write_double_well(&dir.path().join("dw.llg"));
    let out = losscape(&["analyze", "dw.llg"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("SMAD: 0.25"), "{stdout}");
    assert!(stdout.contains("persistence range: 1"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("dw.llg.report.json")).unwrap()).unwrap();
    assert_eq!(report["smad"]["smad"].as_f64().unwrap(), 0.25);
    assert_eq!(report["bar_count"].as_u64().unwrap(), 3);
}

#[test]
fn analyze_with_simplify_drops_the_shallow_pair() {
    let dir = tempdir().unwrap();
    write_double_well(&dir.path().join("dw.llg"));
    let out = losscape(&["analyze", "dw.llg", "--simplify", "1.5", "-o", "report.json"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["smad"]["pair_count"].as_u64().unwrap(), 1);
    assert_eq!(report["simplify_threshold"].as_f64().unwrap(), 1.5);
}

#[test]
fn analyze_constant_grid_warns_about_degenerate_range() {
    let dir = tempdir().unwrap();
    let grid = LandscapeGrid::from_values(&[3, 3], vec![2.0; 9]).unwrap();
    llg::write_llg(&grid, &dir.path().join("flat.llg")).unwrap();
    let out = losscape(&["analyze", "flat.llg"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate range R=0"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("SMAD: 0"));
}

#[test]
fn smad_subcommand_prints_only_the_value() {
    let dir = tempdir().unwrap();
    write_double_well(&dir.path().join("dw.llg"));
    let out = losscape(&["smad", "dw.llg"], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.25");
}

#[test]
fn bad_magic_exits_2() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("junk.llg"), b"JUNKJUNKJUNK").unwrap();
    let out = losscape(&["analyze", "junk.llg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not an LLG file"));
}

#[test]
fn truncated_values_exit_2_with_expected_count() {
    let dir = tempdir().unwrap();
    let grid = LandscapeGrid::from_values(&[5], vec![0.0, 2.0, 1.0, 2.0, 0.0]).unwrap();
    let mut bytes = llg::grid_to_llg_bytes(&grid).unwrap();
    bytes.truncate(bytes.len() - 16);
    fs::write(dir.path().join("short.llg"), bytes).unwrap();
    let out = losscape(&["analyze", "short.llg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("requires 5 values"), "{stderr}");
    assert!(stderr.contains("3 values"), "{stderr}");
}

#[test]
fn non_finite_values_exit_3() {
    let dir = tempdir().unwrap();
    let grid = LandscapeGrid::from_values(&[5], vec![0.0, 2.0, 1.0, 2.0, 0.0]).unwrap();
    let mut bytes = llg::grid_to_llg_bytes(&grid).unwrap();
    let n = bytes.len();
    bytes[n - 8..].copy_from_slice(&f64::INFINITY.to_le_bytes());
    fs::write(dir.path().join("inf.llg"), bytes).unwrap();
    let out = losscape(&["analyze", "inf.llg"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_builtin_exits_2_listing_names() {
    let dir = tempdir().unwrap();
    let out = losscape(&["sample", "--fn", "mystery", "-o", "x.llg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("rosenbrock") && stderr.contains("gaussian-mixture"), "{stderr}");
}

#[test]
fn contour_of_3d_grid_exits_2_with_dimensionality_message() {
    let dir = tempdir().unwrap();
    let grid = LandscapeGrid::from_values(&[3, 3, 3], (0..27).map(|i| i as f64).collect()).unwrap();
    llg::write_llg(&grid, &dir.path().join("cube.llg")).unwrap();
    let out = losscape(&["render", "cube.llg", "--contour", "c.svg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2-dimensional"));
    assert!(!dir.path().join("c.svg").exists(), "no partial output on failure");
}

#[test]
fn render_writes_all_requested_svgs() {
    let dir = tempdir().unwrap();
    let out = losscape(
        &["sample", "--fn", "gaussian-mixture", "--dims", "2", "--range", "1.5", "--steps", "15", "--seed", "1", "-o", "mix.llg"],
        dir.path(),
    );
    assert!(out.status.success());
    let out = losscape(
        &[
            "render", "mix.llg", "--barcode", "b.svg", "--mergetree", "t.svg", "--profile", "p.svg",
            "--contour", "c.svg",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["b.svg", "t.svg", "p.svg", "c.svg"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("<svg"), "{name}");
        assert!(text.ends_with("</svg>\n"), "{name}");
    }
}

#[test]
fn csv_and_llg_agree_on_analysis() {
    let dir = tempdir().unwrap();
    // 11x11 table: rows map to the second (fastest) axis.
    let mut csv = String::new();
    let value = |r: usize, c: usize| {
        let (x, y) = (r as f64 - 5.0, c as f64 - 5.0);
        (0.3 * x).sin() * (0.4 * y).cos() + 0.02 * (x * x + y * y)
    };
    for r in 0..11 {
        let row: Vec<String> = (0..11).map(|c| format!("{}", value(r, c))).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    fs::write(dir.path().join("table.csv"), &csv).unwrap();

    let mut values = vec![0.0; 121];
    for r in 0..11 {
        for c in 0..11 {
            values[c * 11 + r] = value(r, c);
        }
    }
    let grid = LandscapeGrid::from_values(&[11, 11], values).unwrap();
    llg::write_llg(&grid, &dir.path().join("table.llg")).unwrap();

    let a = losscape(&["analyze", "table.csv", "-o", "csv.json"], dir.path());
    let b = losscape(&["analyze", "table.llg", "-o", "llg.json"], dir.path());
    assert!(a.status.success() && b.status.success());
    let ja: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("csv.json")).unwrap()).unwrap();
    let jb: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("llg.json")).unwrap()).unwrap();
    assert_eq!(ja["smad"], jb["smad"]);
    assert_eq!(ja["pairs"], jb["pairs"]);
    assert_eq!(ja["persistence_range"], jb["persistence_range"]);
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let dir = tempdir().unwrap();
    let args = ["sample", "--fn", "gaussian-mixture", "--dims", "2", "--seed", "7", "--steps", "13", "-o"];
    let mut runs = Vec::new();
    for name in ["a.llg", "b.llg"] {
        let mut full: Vec<&str> = args.to_vec();
        full.push(name);
        assert!(losscape(&full, dir.path()).status.success());
        runs.push(fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(runs[0], runs[1]);

    for name in ["r1.json", "r2.json"] {
        assert!(losscape(&["analyze", "a.llg", "-o", name], dir.path()).status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("r1.json")).unwrap(),
        fs::read(dir.path().join("r2.json")).unwrap()
    );
}

#[test]
fn config_file_fills_gaps_but_flags_win() {
    let dir = tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"range": 1.0, "steps": 5, "function": "quadratic", "dims": 2}"#,
    )
    .unwrap();
    // steps comes from the explicit flag, range and oracle from the config.
    let out = losscape(
        &["sample", "--steps", "7", "--config", "cfg.json", "-o", "grid.llg"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = llg::read_llg(&dir.path().join("grid.llg")).unwrap();
    assert_eq!(grid.shape(), &[7, 7]);
    assert_eq!(grid.axes()[0].last(), Some(&1.0));
}

#[test]
fn mlp_checkpoint_round_trips_through_the_cli() {
    let dir = tempdir().unwrap();
    let spec = losscape::oracle::MlpSpec {
        layer_widths: vec![2, 8, 1],
        activation: losscape::oracle::Activation::Tanh,
        loss: losscape::oracle::LossKind::Mse,
    };
    let data = losscape::oracle::ToyDataset::two_blobs(24, 1.0, 0.4, 0.0, 3).unwrap();
    let cfg = losscape::oracle::TrainConfig { epochs: 40, lr: 0.2, batch: 8, weight_decay: 1e-3, seed: 2 };
    let theta = losscape::oracle::train_mlp(&spec, &data, &cfg).unwrap();
    llg::save_checkpoint(&dir.path().join("model.f64"), &theta, &spec).unwrap();
    fs::write(
        dir.path().join("data.json"),
        serde_json::to_string(&data).unwrap(),
    )
    .unwrap();
    let out = losscape(
        &[
            "sample", "--checkpoint", "model.f64", "--data", "data.json", "-n", "2", "--range", "0.5",
            "--steps", "9", "-o", "mlp.llg",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid = llg::read_llg(&dir.path().join("mlp.llg")).unwrap();
    assert_eq!(grid.shape(), &[9, 9]);
    assert!(grid.meta.oracle_id.as_deref().unwrap().starts_with("mlp"));
    let out = losscape(&["analyze", "mlp.llg"], dir.path());
    assert!(out.status.success());
}
