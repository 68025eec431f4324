//! All four SVG renderers over one rough 2-D landscape: the contour map,
//! persistence barcode, merge tree, and the nested landscape profile.

use losscape::oracle::{GaussianMixture, ParamVector};
use losscape::sampler::{sample_grid, SubspaceSpec};
use losscape::topology::{build_merge_tree, stable_manifolds, Adjacency};
use losscape::viz;

fn main() -> losscape::Result<()> {
    let oracle = GaussianMixture::seeded(2, 6, 1)?;
    let spec = SubspaceSpec::new(
        ParamVector::zeros(2)?,
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![1.6, 1.6],
        vec![41, 41],
        None,
    )?;
    let grid = sample_grid(&oracle, &spec)?;
    let (tree, barcode) = build_merge_tree(&grid, Adjacency::Axis)?;
    let manifolds = stable_manifolds(&grid, Adjacency::Axis)?;
    let layout = viz::layout_profile(&tree, &manifolds, &grid, viz::DEFAULT_PROFILE_LEVELS)?;

    let outputs = [
        ("gallery_contour.svg", viz::render_contour(&grid, 12)?),
        ("gallery_barcode.svg", viz::render_barcode(&barcode)),
        ("gallery_tree.svg", viz::render_merge_tree(&tree)),
        ("gallery_profile.svg", viz::render_profile(&layout)),
    ];
    for (name, svg) in &outputs {
        std::fs::write(name, svg)?;
        println!("wrote {name} ({} bytes)", svg.len());
    }
    println!(
        "{} minima, {} bars, {} profile branches",
        tree.minima.len(),
        barcode.pairs.len(),
        layout.branches.len()
    );
    Ok(())
}
