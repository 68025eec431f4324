//! Hessian spectrum probes driven purely by Hessian-vector products:
//! top-k eigenpairs via power iteration with deflation, the dominant
//! eigenvalue, and a stochastic trace estimate.

use crate::error::{Error, Result};
use crate::oracle::{LossOracle, ParamVector};
use crate::vecmath::{dot, norm, scale};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Ordering of the returned eigenpairs.
///
/// `Magnitude` (the default) matches what deflated power iteration finds:
/// eigenvalues sorted by descending `|lambda|`, signs retained, so strongly
/// negative directions rank among the top. `Algebraic` re-sorts those same
/// pairs by descending signed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EigenOrdering {
    #[default]
    Magnitude,
    Algebraic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Number of eigenpairs to extract; `1 <= k <= dim`.
    pub k: usize,
    pub max_iter: usize,
    /// Relative convergence tolerance on both the Rayleigh-quotient drift and
    /// the residual norm.
    pub tol: f64,
    pub seed: u64,
    pub ordering: EigenOrdering,
}

impl SpectralConfig {
    pub fn new(k: usize) -> Self {
        SpectralConfig {
            k,
            max_iter: 10_000,
            tol: 1e-10,
            seed: 0,
            ordering: EigenOrdering::Magnitude,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.k == 0 || self.k > dim {
            return Err(Error::usage(format!(
                "eigenpair count k = {} must satisfy 1 <= k <= dim = {dim}",
                self.k
            )));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::usage(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::usage("max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// Eigenpairs with per-pair convergence diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, pairwise orthogonal; sign fixed so the
    /// largest-magnitude component is positive.
    pub eigenvectors: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
    /// `|H v - lambda v|` for each accepted pair.
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    /// All eigenvalues exactly zero (zero Hessian along every probed
    /// direction); the vectors are then an arbitrary orthonormal set.
    pub degenerate: bool,
}

impl SpectralResult {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MaxEigenvalue {
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-6 {
            let mut v = v;
            scale(1.0 / n, &mut v);
            return v;
        }
    }
}

/// v -= sum_i (e_i . v) e_i
fn deflate(v: &mut [f64], basis: &[Vec<f64>]) {
    for e in basis {
        let c = dot(e, v);
        for (vi, ei) in v.iter_mut().zip(e) {
            *vi -= c * ei;
        }
    }
}

struct PairOutcome {
    value: f64,
    vector: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
    zero_direction: bool,
}

fn power_iterate(
    oracle: &dyn LossOracle,
    theta: &ParamVector,
    basis: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    max_iter: usize,
    tol: f64,
) -> Result<PairOutcome> {
    let dim = oracle.dim();
    let mut v = random_unit(rng, dim);
    deflate(&mut v, basis);
    let n = norm(&v);
    if n <= 1e-8 {
        // Start vector fell inside the deflated span; redraw once.
        v = random_unit(rng, dim);
        deflate(&mut v, basis);
    }
    let n = norm(&v);
    if n <= 1e-8 {
        return Err(Error::numeric("cannot find a start vector outside the deflated span"));
    }
    scale(1.0 / norm(&v), &mut v);

    let mut lambda_prev = f64::INFINITY;
    let mut outcome = PairOutcome {
        value: 0.0,
        vector: v.clone(),
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
        zero_direction: false,
    };
    for t in 1..=max_iter {
        let mut w = crate::oracle::eval_hvp(oracle, theta, &v)?;
        deflate(&mut w, basis);
        let lambda = dot(&v, &w);
        let residual = {
            let mut r = w.clone();
            for (ri, vi) in r.iter_mut().zip(&v) {
                *ri -= lambda * vi;
            }
            norm(&r)
        };
        outcome.value = lambda;
        outcome.vector.copy_from_slice(&v);
        outcome.iterations = t;
        outcome.residual = residual;
        let bound = tol * lambda.abs().max(1.0);
        if residual <= bound && (lambda - lambda_prev).abs() <= bound {
            outcome.converged = true;
            break;
        }
        let w_norm = norm(&w);
        if w_norm <= 1e-250 {
            // Zero Hessian along this direction: lambda = 0 with the current
            // (arbitrary) orthonormal vector.
            outcome.value = 0.0;
            outcome.residual = w_norm;
            outcome.converged = true;
            outcome.zero_direction = true;
            break;
        }
        scale(1.0 / w_norm, &mut w);
        deflate(&mut w, basis);
        let n = norm(&w);
        if n <= 1e-250 {
            outcome.value = 0.0;
            outcome.residual = 0.0;
            outcome.converged = true;
            outcome.zero_direction = true;
            break;
        }
        scale(1.0 / n, &mut w);
        v = w;
        lambda_prev = lambda;
    }
    fix_sign(&mut outcome.vector);
    Ok(outcome)
}

/// Force the largest-magnitude component positive so eigenvector signs are
/// reproducible across runs.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        scale(-1.0, v);
    }
}

/// Top-k eigenpairs by deflated power iteration.
///
/// Pairs are found in descending-magnitude order; each iterate is
/// re-orthogonalized against all previously accepted eigenvectors.
/// Non-converged pairs are flagged per pair rather than failing the call.
pub fn top_eigenpairs(
    oracle: &dyn LossOracle,
    theta: &ParamVector,
    cfg: &SpectralConfig,
) -> Result<SpectralResult> {
    cfg.validate(oracle.dim())?;
    if theta.len() != oracle.dim() {
        return Err(Error::usage(format!(
            "theta has dimension {} but oracle expects {}",
            theta.len(),
            oracle.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cfg.k);
    let mut pairs: Vec<PairOutcome> = Vec::with_capacity(cfg.k);
    for _ in 0..cfg.k {
        let outcome = power_iterate(oracle, theta, &basis, &mut rng, cfg.max_iter, cfg.tol)?;
        basis.push(outcome.vector.clone());
        pairs.push(outcome);
    }

    let mut idx: Vec<usize> = (0..cfg.k).collect();
    match cfg.ordering {
        EigenOrdering::Magnitude => {
            idx.sort_by(|&a, &b| pairs[b].value.abs().total_cmp(&pairs[a].value.abs()))
        }
        EigenOrdering::Algebraic => {
            idx.sort_by(|&a, &b| pairs[b].value.total_cmp(&pairs[a].value))
        }
    }
    let degenerate = pairs.iter().all(|p| p.zero_direction);
    Ok(SpectralResult {
        eigenvalues: idx.iter().map(|&i| pairs[i].value).collect(),
        eigenvectors: idx.iter().map(|&i| pairs[i].vector.clone()).collect(),
        iterations: idx.iter().map(|&i| pairs[i].iterations).collect(),
        residuals: idx.iter().map(|&i| pairs[i].residual).collect(),
        converged: idx.iter().map(|&i| pairs[i].converged).collect(),
        degenerate,
    })
}

/// Signed eigenvalue of largest magnitude (power iteration, no deflation).
pub fn max_eigenvalue(
    oracle: &dyn LossOracle,
    theta: &ParamVector,
    cfg: &SpectralConfig,
) -> Result<MaxEigenvalue> {
    let mut one = cfg.clone();
    one.k = 1;
    one.validate(oracle.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let outcome = power_iterate(oracle, theta, &[], &mut rng, cfg.max_iter, cfg.tol)?;
    Ok(MaxEigenvalue {
        value: outcome.value,
        iterations: outcome.iterations,
        residual: outcome.residual,
        converged: outcome.converged,
        degenerate: outcome.zero_direction,
    })
}

/// Hutchinson trace estimate: mean of `z' H z` over i.i.d. Rademacher `z`.
///
/// `stderr` is the sample standard deviation over the samples divided by
/// `sqrt(samples)` (zero for a single sample). Deterministic per seed.
pub fn hutchinson_trace(
    oracle: &dyn LossOracle,
    theta: &ParamVector,
    samples: usize,
    seed: u64,
) -> Result<TraceEstimate> {
    if samples == 0 {
        return Err(Error::usage("hutchinson needs at least one sample"));
    }
    if theta.len() != oracle.dim() {
        return Err(Error::usage(format!(
            "theta has dimension {} but oracle expects {}",
            theta.len(),
            oracle.dim()
        )));
    }
    let dim = oracle.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z: Vec<f64> = (0..dim)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let hz = crate::oracle::eval_hvp(oracle, theta, &z)?;
        draws.push(dot(&z, &hz));
    }
    let mean = draws.iter().sum::<f64>() / samples as f64;
    let stderr = if samples > 1 {
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (samples - 1) as f64;
        (var / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(TraceEstimate { estimate: mean, stderr, samples })
}
