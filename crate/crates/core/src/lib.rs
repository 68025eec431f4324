//! Loss-landscape construction, 0-dimensional persistence, and the SMAD
//! smoothness metric.
//!
//! The pipeline has three stages:
//!
//! 1. **Construction** — [`spectral`] extracts top Hessian eigenpairs from a
//!    [`oracle::LossOracle`] via Hessian-vector products, and [`sampler`]
//!    evaluates the loss on a grid in the spanned subspace.
//! 2. **Topology** — [`topology`] sweeps the sublevel filtration of the grid
//!    into a merge tree, persistence barcode, and stable-manifold weights,
//!    with optional persistence simplification.
//! 3. **Quantification & rendering** — [`metrics`] computes SMAD and
//!    companion scalars into a JSON report; [`viz`] renders barcodes, merge
//!    trees, landscape profiles, and contour maps as deterministic SVG.
//!
//! Externally computed grids enter through the LLG file format in [`llg`].
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example quadratic_bowl        # end-to-end smooth baseline
//! cargo run --example double_well           # barcode + merge tree of two wells
//! cargo run --example rough_vs_smooth       # SMAD discrimination + simplify
//! cargo run --example spectral_probe        # eigenpairs and Hutchinson trace
//! cargo run --example fit_regimes           # underfit/well-fit/overfit MLPs
//! cargo run --example render_gallery        # all four SVG renderers
//! cargo run --example external_grid         # LLG/CSV ingestion boundary
//! ```
//!
//! The `losscape` binary wraps the same pipeline as `sample`, `spectrum`,
//! `analyze`, `render`, and `smad` subcommands.

pub mod error;
pub mod llg;
pub mod metrics;
pub mod oracle;
pub mod sampler;
pub mod spectral;
pub mod topology;
pub mod viz;

mod vecmath;

pub use error::{Error, Result};
