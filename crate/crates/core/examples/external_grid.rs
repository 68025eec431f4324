//! The ingestion boundary: grids computed by an external framework enter
//! the pipeline as LLG or CSV files. This example plays the external side,
//! writes both formats, reads them back, and shows the analyses agree.

use losscape::llg;
use losscape::metrics::assemble_report;
use losscape::sampler::LandscapeGrid;
use losscape::topology::{build_merge_tree, stable_manifolds, Adjacency};

fn main() -> losscape::Result<()> {
    // Pretend these 11x11 losses came from some large training framework.
    let value = |r: usize, c: usize| {
        let (x, y) = (r as f64 - 5.0, c as f64 - 5.0);
        0.8 * (1.1 * x).sin() * (0.9 * y).cos() + 0.05 * (x * x + y * y)
    };

    // CSV rows map to the second (fastest) axis, so cell (r, c) lands at
    // values[c * n_rows + r].
    let mut csv = String::new();
    let mut values = vec![0.0; 121];
    for r in 0..11 {
        let row: Vec<String> = (0..11).map(|c| value(r, c).to_string()).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
        for c in 0..11 {
            values[c * 11 + r] = value(r, c);
        }
    }
    std::fs::write("external.csv", &csv)?;

    let mut grid = LandscapeGrid::from_values(&[11, 11], values)?;
    grid.meta.extra.insert("source".into(), serde_json::json!("external-framework"));
    grid.meta.extra.insert("checkpoint_step".into(), serde_json::json!(40_000));
    llg::write_llg(&grid, std::path::Path::new("external.llg"))?;
    println!("wrote external.csv and external.llg");

    let from_llg = llg::read_llg(std::path::Path::new("external.llg"))?;
    let from_csv = llg::read_csv_grid(std::path::Path::new("external.csv"))?;
    assert_eq!(from_llg.values(), from_csv.values());
    // Unknown metadata keys ride along untouched.
    assert_eq!(
        from_llg.meta.extra.get("checkpoint_step"),
        Some(&serde_json::json!(40_000))
    );

    for (name, grid) in [("llg", &from_llg), ("csv", &from_csv)] {
        let (_, barcode) = build_merge_tree(grid, Adjacency::Axis)?;
        let manifolds = stable_manifolds(grid, Adjacency::Axis)?;
        let report = assemble_report(grid, &barcode, &manifolds, None, None)?;
        println!(
            "{name}: SMAD {:.6}, {} bars, persistence range {:.4}",
            report.smad.smad, report.bar_count, report.persistence_range
        );
    }
    Ok(())
}
