//! SMAD separating rough from smooth geometry, plus persistence
//! simplification stripping noise pairs one threshold at a time.

use losscape::metrics::smad;
use losscape::oracle::{GaussianMixture, ParamVector, Quadratic};
use losscape::sampler::{sample_grid, SubspaceSpec};
use losscape::topology::{build_merge_tree, simplify, stable_manifolds, Adjacency};

fn plane(origin: ParamVector) -> losscape::Result<SubspaceSpec> {
    SubspaceSpec::new(
        origin,
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![1.6, 1.6],
        vec![33, 33],
        None,
    )
}

fn main() -> losscape::Result<()> {
    let rough_oracle = GaussianMixture::seeded(2, 6, 1)?;
    let rough = sample_grid(&rough_oracle, &plane(ParamVector::zeros(2)?)?)?;
    let bowl = sample_grid(&Quadratic::diagonal(&[2.0, 1.0])?, &plane(ParamVector::zeros(2)?)?)?;

    for (name, grid) in [("rough mixture", &rough), ("quadratic bowl", &bowl)] {
        let (tree, barcode) = build_merge_tree(grid, Adjacency::Axis)?;
        let manifolds = stable_manifolds(grid, Adjacency::Axis)?;
        let report = smad(&barcode, &manifolds, grid)?;
        println!("{name}: {} basins, SMAD {:.6}", tree.minima.len(), report.smad);
    }

    // Simplification sweep on the rough landscape.
    let (tree, barcode) = build_merge_tree(&rough, Adjacency::Axis)?;
    let manifolds = stable_manifolds(&rough, Adjacency::Axis)?;
    let max_p = barcode
        .finite_pairs()
        .map(|p| p.persistence)
        .fold(0.0_f64, f64::max);
    println!("simplification sweep (max persistence {max_p:.4}):");
    for step in 0..5 {
        let tau = max_p * step as f64 / 4.0;
        let (_, b, m) = simplify(&tree, &barcode, &manifolds, tau)?;
        let report = smad(&b, &m, &rough)?;
        println!(
            "  tau {tau:.4}: |S| = {}, SMAD {:.6}",
            report.pair_count, report.smad
        );
    }
    Ok(())
}
