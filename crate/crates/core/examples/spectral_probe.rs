//! Hessian spectrum probes on a dense random symmetric quadratic: top-k
//! eigenpairs with convergence diagnostics, the dominant eigenvalue, and a
//! Hutchinson trace estimate against the exact diagonal sum.

use losscape::oracle::{ParamVector, Quadratic};
use losscape::spectral::{hutchinson_trace, max_eigenvalue, top_eigenpairs, SpectralConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> losscape::Result<()> {
    let dim = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut matrix = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let v = rng.gen_range(-1.0..1.0);
            matrix[i * dim + j] = v;
            matrix[j * dim + i] = v;
        }
    }
    let exact_trace: f64 = (0..dim).map(|i| matrix[i * dim + i]).sum();
    let oracle = Quadratic::new(dim, matrix)?;
    let origin = ParamVector::zeros(dim)?;

    let mut cfg = SpectralConfig::new(4);
    cfg.seed = 3;
    let result = top_eigenpairs(&oracle, &origin, &cfg)?;
    println!("top-4 eigenpairs (magnitude order):");
    for i in 0..result.k() {
        println!(
            "  lambda[{i}] = {:+.6}  residual {:.2e}  {} iterations{}",
            result.eigenvalues[i],
            result.residuals[i],
            result.iterations[i],
            if result.converged[i] { "" } else { "  (not converged)" }
        );
    }

    let dominant = max_eigenvalue(&oracle, &origin, &SpectralConfig::new(1))?;
    println!("dominant eigenvalue: {:+.6}", dominant.value);

    let trace = hutchinson_trace(&oracle, &origin, 2000, 3)?;
    println!(
        "hutchinson trace: {:.4} +- {:.4} over {} samples (exact {:.4})",
        trace.estimate, trace.stderr, trace.samples, exact_trace
    );
    Ok(())
}
