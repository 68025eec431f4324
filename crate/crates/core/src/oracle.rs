//! Loss-function contract and built-in test functions.
//!
//! A [`LossOracle`] exposes the loss value, gradient, and Hessian-vector
//! product at a flat parameter vector. Built-ins (quadratic forms, the 1-D
//! double well, Rosenbrock, Gaussian mixtures, and a small trainable MLP)
//! make the whole pipeline exercisable without any ML framework.

use crate::error::{Error, Result};
use crate::vecmath::{dot, hash_f64s, inf_norm, norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Flat vector of model parameters.
///
/// Entries are finite and the dimension is at least one; both are checked at
/// construction so downstream code can assume them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("parameter vector must have dimension >= 1"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "parameter vector has non-finite entry {} at index {i}",
                values[i]
            )));
        }
        Ok(ParamVector { values })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        ParamVector::new(vec![0.0; dim])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// FNV-1a digest of the raw f64 bits, used for provenance metadata.
    pub fn digest(&self) -> u64 {
        hash_f64s(&self.values)
    }
}

impl std::ops::Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Contract for a differentiable loss surface over `dim()` parameters.
///
/// Oracles are immutable after construction and safe to evaluate from
/// multiple threads concurrently.
pub trait LossOracle: Sync {
    fn dim(&self) -> usize;

    /// Loss value at `theta`. Deterministic for a fixed oracle and point.
    fn value(&self, theta: &[f64]) -> f64;

    /// Gradient of the loss at `theta` (analytic for all built-ins).
    fn gradient(&self, theta: &[f64]) -> Vec<f64>;

    /// Hessian-vector product `H(theta) v`.
    ///
    /// The default is a central difference of the gradient along the
    /// normalized direction: `(grad(theta + eps*u) - grad(theta - eps*u)) *
    /// (|v| / 2eps)` with `u = v/|v|` and `eps = 1e-4 * max(1, |theta|_inf)`.
    /// A zero `v` yields a zero vector. Oracles with an exact product (the
    /// quadratic) override this.
    fn hvp(&self, theta: &[f64], v: &[f64]) -> Vec<f64> {
        let v_norm = norm(v);
        if v_norm == 0.0 {
            return vec![0.0; self.dim()];
        }
        let eps = 1e-4 * inf_norm(theta).max(1.0);
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        for i in 0..theta.len() {
            let step = eps * v[i] / v_norm;
            plus[i] += step;
            minus[i] -= step;
        }
        let gp = self.gradient(&plus);
        let gm = self.gradient(&minus);
        gp.iter()
            .zip(&gm)
            .map(|(p, m)| (p - m) * v_norm / (2.0 * eps))
            .collect()
    }

    /// Short identifier recorded in grid metadata.
    fn id(&self) -> String;
}

fn check_dim(oracle: &dyn LossOracle, len: usize, what: &str) -> Result<()> {
    if len != oracle.dim() {
        return Err(Error::usage(format!(
            "{what} has dimension {len} but oracle expects {}",
            oracle.dim()
        )));
    }
    Ok(())
}

/// Checked loss evaluation: validates dimensions and finiteness.
pub fn eval_loss(oracle: &dyn LossOracle, theta: &ParamVector) -> Result<f64> {
    check_dim(oracle, theta.len(), "parameter vector")?;
    let v = oracle.value(theta);
    if !v.is_finite() {
        return Err(Error::numeric(format!(
            "loss is {v} at theta = {:?}",
            theta.as_slice()
        )));
    }
    Ok(v)
}

/// Checked gradient evaluation.
pub fn eval_gradient(oracle: &dyn LossOracle, theta: &ParamVector) -> Result<Vec<f64>> {
    check_dim(oracle, theta.len(), "parameter vector")?;
    let g = oracle.gradient(theta);
    if let Some(i) = g.iter().position(|x| !x.is_finite()) {
        return Err(Error::numeric(format!(
            "gradient has non-finite entry at index {i} for theta = {:?}",
            theta.as_slice()
        )));
    }
    Ok(g)
}

/// Checked Hessian-vector product.
pub fn eval_hvp(oracle: &dyn LossOracle, theta: &ParamVector, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(oracle, theta.len(), "parameter vector")?;
    check_dim(oracle, v.len(), "direction vector")?;
    let hv = oracle.hvp(theta, v);
    if let Some(i) = hv.iter().position(|x| !x.is_finite()) {
        return Err(Error::numeric(format!(
            "Hessian-vector product has non-finite entry at index {i}"
        )));
    }
    Ok(hv)
}

// ---------------------------------------------------------------------------
// Built-in analytic functions
// ---------------------------------------------------------------------------

/// Quadratic form `L(theta) = theta' A theta / 2` with symmetric `A`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    dim: usize,
    /// Row-major `dim x dim`, symmetric.
    matrix: Vec<f64>,
}

impl Quadratic {
    pub fn new(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::usage(format!(
                "quadratic matrix must be {dim}x{dim}, got {} entries",
                matrix.len()
            )));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = matrix[i * dim + j];
                let b = matrix[j * dim + i];
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::usage(format!(
                        "quadratic matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Quadratic { dim, matrix })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let dim = entries.len();
        let mut matrix = vec![0.0; dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            matrix[i * dim + i] = e;
        }
        Quadratic::new(dim, matrix)
    }

    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| dot(&self.matrix[i * self.dim..(i + 1) * self.dim], x))
            .collect()
    }
}

impl LossOracle for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[f64]) -> f64 {
        0.5 * dot(theta, &self.matvec(theta))
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.matvec(theta)
    }

    fn hvp(&self, _theta: &[f64], v: &[f64]) -> Vec<f64> {
        // Exact: the Hessian of a quadratic form is A itself.
        self.matvec(v)
    }

    fn id(&self) -> String {
        format!("quadratic(dim={})", self.dim)
    }
}

/// One-dimensional double well `L(t) = (t^2 - 1)^2` with minima at +-1.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleWell1d;

impl LossOracle for DoubleWell1d {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let t = theta[0];
        let u = t * t - 1.0;
        u * u
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let t = theta[0];
        vec![4.0 * t * (t * t - 1.0)]
    }

    fn id(&self) -> String {
        "double-well".to_string()
    }
}

/// The Rosenbrock valley; global minimum 0 at `(1, ..., 1)`.
#[derive(Debug, Clone, Copy)]
pub struct Rosenbrock {
    dim: usize,
}

impl Rosenbrock {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::usage("rosenbrock requires dimension >= 2"));
        }
        Ok(Rosenbrock { dim })
    }
}

impl LossOracle for Rosenbrock {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.dim - 1 {
            let a = theta[i + 1] - theta[i] * theta[i];
            let b = 1.0 - theta[i];
            sum += 100.0 * a * a + b * b;
        }
        sum
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for i in 0..self.dim - 1 {
            let a = theta[i + 1] - theta[i] * theta[i];
            g[i] += -400.0 * theta[i] * a - 2.0 * (1.0 - theta[i]);
            g[i + 1] += 200.0 * a;
        }
        g
    }

    fn id(&self) -> String {
        format!("rosenbrock(dim={})", self.dim)
    }
}

/// Bowl plus Gaussian dips:
/// `L(theta) = |theta|^2 / 2 - sum_j depth_j * exp(-|theta - c_j|^2 / (2 w_j^2))`.
///
/// Basin count and depth are directly controllable, which makes this the
/// stand-in for rough landscapes in smooth-vs-rough comparisons.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    dim: usize,
    centers: Vec<Vec<f64>>,
    depths: Vec<f64>,
    widths: Vec<f64>,
    seed: Option<u64>,
}

impl GaussianMixture {
    pub fn new(centers: Vec<Vec<f64>>, depths: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::usage("gaussian mixture needs at least one center"));
        }
        let dim = centers[0].len();
        if dim == 0 {
            return Err(Error::usage("gaussian mixture centers must be non-empty"));
        }
        if centers.iter().any(|c| c.len() != dim) {
            return Err(Error::usage("gaussian mixture centers have mixed dimensions"));
        }
        if depths.len() != centers.len() || widths.len() != centers.len() {
            return Err(Error::usage(
                "gaussian mixture centers, depths, and widths must have equal length",
            ));
        }
        if widths.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::usage("gaussian mixture widths must be positive"));
        }
        Ok(GaussianMixture {
            dim,
            centers,
            depths,
            widths,
            seed: None,
        })
    }

    /// Deterministic random mixture: centers in `[-1.2, 1.2]^dim`, depths in
    /// `[0.3, 1.0]`, widths in `[0.2, 0.5]`.
    pub fn seeded(dim: usize, basins: usize, seed: u64) -> Result<Self> {
        if dim == 0 || basins == 0 {
            return Err(Error::usage("gaussian mixture needs dim >= 1 and basins >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers = Vec::with_capacity(basins);
        let mut depths = Vec::with_capacity(basins);
        let mut widths = Vec::with_capacity(basins);
        for _ in 0..basins {
            centers.push((0..dim).map(|_| rng.gen_range(-1.2..1.2)).collect());
            depths.push(rng.gen_range(0.3..1.0));
            widths.push(rng.gen_range(0.2..0.5));
        }
        let mut mix = GaussianMixture::new(centers, depths, widths)?;
        mix.seed = Some(seed);
        Ok(mix)
    }
}

impl LossOracle for GaussianMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let mut v = 0.5 * dot(theta, theta);
        for ((c, &d), &w) in self.centers.iter().zip(&self.depths).zip(&self.widths) {
            let r2: f64 = theta.iter().zip(c).map(|(t, ci)| (t - ci) * (t - ci)).sum();
            v -= d * (-r2 / (2.0 * w * w)).exp();
        }
        v
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = theta.to_vec();
        for ((c, &d), &w) in self.centers.iter().zip(&self.depths).zip(&self.widths) {
            let r2: f64 = theta.iter().zip(c).map(|(t, ci)| (t - ci) * (t - ci)).sum();
            let coeff = d * (-r2 / (2.0 * w * w)).exp() / (w * w);
            for i in 0..self.dim {
                g[i] += coeff * (theta[i] - c[i]);
            }
        }
        g
    }

    fn id(&self) -> String {
        match self.seed {
            Some(s) => format!(
                "gaussian-mixture(dim={},basins={},seed={s})",
                self.dim,
                self.centers.len()
            ),
            None => format!("gaussian-mixture(dim={},basins={})", self.dim, self.centers.len()),
        }
    }
}

// ---------------------------------------------------------------------------
// Toy MLP
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Tanh,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Mse,
    CrossEntropy,
}

/// Dense-layer network description. `layer_widths` includes the input and
/// output widths, e.g. `[2, 16, 2]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub loss: LossKind,
}

impl MlpSpec {
    pub fn param_count(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::usage("mlp needs at least input and output widths"));
        }
        if self.layer_widths.contains(&0) {
            return Err(Error::usage("mlp layer widths must be positive"));
        }
        if self.loss == LossKind::Mse && *self.layer_widths.last().unwrap() != 1 {
            return Err(Error::usage("mse loss requires an output width of 1"));
        }
        if self.loss == LossKind::CrossEntropy && *self.layer_widths.last().unwrap() < 2 {
            return Err(Error::usage("cross-entropy requires an output width >= 2"));
        }
        Ok(())
    }
}

/// In-memory dataset: `inputs` is m x p, `targets` has length m. For
/// cross-entropy the targets are class indices stored as reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl ToyDataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::usage("dataset needs at least one sample"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::usage(format!(
                "dataset has {} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let p = inputs[0].len();
        if p == 0 || inputs.iter().any(|x| x.len() != p) {
            return Err(Error::usage("dataset inputs must share a positive width"));
        }
        Ok(ToyDataset { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_width(&self) -> usize {
        self.inputs[0].len()
    }

    /// Two seeded Gaussian blobs with labels 0 and 1, centered at
    /// `(-separation, 0)` and `(separation, 0)`. A `label_noise` fraction of
    /// samples gets its label flipped, which is how the overfit regime gets
    /// something to memorize.
    pub fn two_blobs(samples: usize, separation: f64, noise: f64, label_noise: f64, seed: u64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::usage("two_blobs needs at least 2 samples"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inputs = Vec::with_capacity(samples);
        let mut targets = Vec::with_capacity(samples);
        for i in 0..samples {
            let class = i % 2;
            let cx = if class == 0 { -separation } else { separation };
            let x = cx + noise * gauss(&mut rng);
            let y = noise * gauss(&mut rng);
            let label = if rng.gen::<f64>() < label_noise {
                1 - class
            } else {
                class
            };
            inputs.push(vec![x, y]);
            targets.push(label as f64);
        }
        ToyDataset::new(inputs, targets)
    }
}

/// Box-Muller draw; two uniforms per normal keeps the stream consumption fixed.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// MLP loss surface over flat parameters: full-dataset mean loss.
pub struct MlpOracle {
    spec: MlpSpec,
    data: ToyDataset,
}

impl MlpOracle {
    pub fn new(spec: MlpSpec, data: ToyDataset) -> Result<Self> {
        spec.validate()?;
        if data.input_width() != spec.layer_widths[0] {
            return Err(Error::usage(format!(
                "dataset width {} does not match mlp input width {}",
                data.input_width(),
                spec.layer_widths[0]
            )));
        }
        if spec.loss == LossKind::CrossEntropy {
            let classes = *spec.layer_widths.last().unwrap();
            for &t in &data.targets {
                if t < 0.0 || t.fract() != 0.0 || t as usize >= classes {
                    return Err(Error::usage(format!(
                        "cross-entropy target {t} is not a class index in 0..{classes}"
                    )));
                }
            }
        }
        Ok(MlpOracle { spec, data })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn data(&self) -> &ToyDataset {
        &self.data
    }

    /// Forward pass for one sample; returns all post-activation layer outputs
    /// (index 0 is the input itself).
    fn forward(&self, theta: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let widths = &self.spec.layer_widths;
        let n_layers = widths.len() - 1;
        let mut activations = Vec::with_capacity(widths.len());
        activations.push(x.to_vec());
        let mut offset = 0;
        for l in 0..n_layers {
            let (w_in, w_out) = (widths[l], widths[l + 1]);
            let prev = &activations[l];
            let mut z = vec![0.0; w_out];
            for o in 0..w_out {
                let row = &theta[offset + o * w_in..offset + (o + 1) * w_in];
                z[o] = dot(row, prev) + theta[offset + w_in * w_out + o];
            }
            if l + 1 < n_layers {
                for zo in z.iter_mut() {
                    *zo = match self.spec.activation {
                        Activation::Tanh => zo.tanh(),
                        Activation::Relu => zo.max(0.0),
                    };
                }
            }
            offset += w_in * w_out + w_out;
            activations.push(z);
        }
        activations
    }

    fn sample_loss(&self, output: &[f64], target: f64) -> f64 {
        match self.spec.loss {
            LossKind::Mse => {
                let d = output[0] - target;
                0.5 * d * d
            }
            LossKind::CrossEntropy => {
                let m = output.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + output.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
                lse - output[target as usize]
            }
        }
    }

    /// Reverse-mode gradient accumulated over the full dataset (mean).
    fn full_gradient(&self, theta: &[f64]) -> Vec<f64> {
        let widths = &self.spec.layer_widths;
        let n_layers = widths.len() - 1;
        let m = self.data.len() as f64;
        let mut grad = vec![0.0; theta.len()];

        // Per-layer parameter offsets.
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for l in 0..n_layers {
            offsets.push(off);
            off += widths[l] * widths[l + 1] + widths[l + 1];
        }

        for (x, &target) in self.data.inputs.iter().zip(&self.data.targets) {
            let acts = self.forward(theta, x);
            let output = acts.last().unwrap();

            // dL/dz for the linear output layer.
            let mut delta: Vec<f64> = match self.spec.loss {
                LossKind::Mse => vec![(output[0] - target) / m],
                LossKind::CrossEntropy => {
                    let mx = output.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let exps: Vec<f64> = output.iter().map(|z| (z - mx).exp()).collect();
                    let sum: f64 = exps.iter().sum();
                    let mut d: Vec<f64> = exps.iter().map(|e| e / sum / m).collect();
                    d[target as usize] -= 1.0 / m;
                    d
                }
            };

            for l in (0..n_layers).rev() {
                let (w_in, w_out) = (widths[l], widths[l + 1]);
                let base = offsets[l];
                let prev = &acts[l];
                for o in 0..w_out {
                    let d = delta[o];
                    let row = &mut grad[base + o * w_in..base + (o + 1) * w_in];
                    for (g, p) in row.iter_mut().zip(prev) {
                        *g += d * p;
                    }
                    grad[base + w_in * w_out + o] += d;
                }
                if l > 0 {
                    let mut next_delta = vec![0.0; w_in];
                    for o in 0..w_out {
                        let d = delta[o];
                        let row = &theta[base + o * w_in..base + (o + 1) * w_in];
                        for (nd, w) in next_delta.iter_mut().zip(row) {
                            *nd += d * w;
                        }
                    }
                    // Activation derivative on the pre-layer output.
                    for (nd, a) in next_delta.iter_mut().zip(prev) {
                        *nd *= match self.spec.activation {
                            Activation::Tanh => 1.0 - a * a,
                            Activation::Relu => {
                                if *a > 0.0 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                        };
                    }
                    delta = next_delta;
                }
            }
        }
        grad
    }

    /// Fraction of samples classified correctly (argmax for cross-entropy,
    /// 0.5 threshold for single-output regression labels).
    pub fn accuracy(&self, theta: &ParamVector) -> Result<f64> {
        check_dim(self, theta.len(), "parameter vector")?;
        let mut correct = 0;
        for (x, &target) in self.data.inputs.iter().zip(&self.data.targets) {
            let acts = self.forward(theta, x);
            let out = acts.last().unwrap();
            let pred = if out.len() == 1 {
                usize::from(out[0] >= 0.5)
            } else {
                out.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, _)| i)
                    .unwrap()
            };
            if pred == target as usize {
                correct += 1;
            }
        }
        Ok(correct as f64 / self.data.len() as f64)
    }
}

impl LossOracle for MlpOracle {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let total: f64 = self
            .data
            .inputs
            .iter()
            .zip(&self.data.targets)
            .map(|(x, &t)| {
                let acts = self.forward(theta, x);
                self.sample_loss(acts.last().unwrap(), t)
            })
            .sum();
        total / self.data.len() as f64
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.full_gradient(theta)
    }

    fn id(&self) -> String {
        format!(
            "mlp(widths={:?},samples={})",
            self.spec.layer_widths,
            self.data.len()
        )
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

/// Seeded Glorot-uniform initialization; biases start at zero.
pub fn init_mlp_params(spec: &MlpSpec, seed: u64) -> Result<ParamVector> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Vec::with_capacity(spec.param_count());
    for w in spec.layer_widths.windows(2) {
        let (w_in, w_out) = (w[0], w[1]);
        let bound = (6.0 / (w_in + w_out) as f64).sqrt();
        for _ in 0..w_in * w_out {
            params.push(rng.gen_range(-bound..bound));
        }
        params.extend(std::iter::repeat_n(0.0, w_out));
    }
    ParamVector::new(params)
}

/// Mini-batch SGD with L2 weight decay. Deterministic for a fixed seed:
/// the same seed drives initialization and the per-epoch shuffle, and sample
/// iteration order is fixed, so two runs produce bit-identical parameters.
/// `epochs = 0` returns the seeded initialization unchanged.
pub fn train_mlp(spec: &MlpSpec, data: &ToyDataset, cfg: &TrainConfig) -> Result<ParamVector> {
    if cfg.batch == 0 {
        return Err(Error::usage("batch size must be >= 1"));
    }
    if !(cfg.lr.is_finite() && cfg.lr > 0.0) {
        return Err(Error::usage(format!("learning rate must be positive, got {}", cfg.lr)));
    }
    let oracle = MlpOracle::new(spec.clone(), data.clone())?;
    let mut theta = init_mlp_params(spec, cfg.seed)?.into_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let m = data.len();

    let mut order: Vec<usize> = (0..m).collect();
    for epoch in 0..cfg.epochs {
        // Fisher-Yates with the seeded stream.
        for i in (1..m).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(cfg.batch.min(m)) {
            let batch_inputs: Vec<Vec<f64>> = chunk.iter().map(|&i| data.inputs[i].clone()).collect();
            let batch_targets: Vec<f64> = chunk.iter().map(|&i| data.targets[i]).collect();
            let batch = ToyDataset::new(batch_inputs, batch_targets)?;
            let batch_oracle = MlpOracle::new(spec.clone(), batch)?;
            let g = batch_oracle.full_gradient(&theta);
            for i in 0..theta.len() {
                theta[i] -= cfg.lr * (g[i] + cfg.weight_decay * theta[i]);
            }
        }
        let loss = oracle.value(&theta);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
    }
    ParamVector::new(theta)
}

// ---------------------------------------------------------------------------
// Builtin lookup for the CLI
// ---------------------------------------------------------------------------

pub const BUILTIN_NAMES: &str =
    "quadratic, quadratic-diag-<a>-<b>-..., double-well, rosenbrock, gaussian-mixture";

/// Resolve a builtin by CLI name.
///
/// `quadratic` defaults to `diag(d, d-1, ..., 1)`; `quadratic-diag-5-2-1`
/// encodes explicit diagonal entries (dimension follows from the name).
pub fn builtin_from_name(name: &str, dims: usize, seed: u64) -> Result<Box<dyn LossOracle + Send>> {
    if let Some(rest) = name.strip_prefix("quadratic-diag-") {
        let entries: Result<Vec<f64>> = rest
            .split('-')
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::usage(format!("bad diagonal entry {tok:?} in {name:?}")))
            })
            .collect();
        return Ok(Box::new(Quadratic::diagonal(&entries?)?));
    }
    match name {
        "quadratic" => {
            if dims == 0 {
                return Err(Error::usage("quadratic requires --dims >= 1"));
            }
            let entries: Vec<f64> = (1..=dims).rev().map(|i| i as f64).collect();
            Ok(Box::new(Quadratic::diagonal(&entries)?))
        }
        "double-well" => {
            if dims > 1 {
                return Err(Error::usage("double-well is one-dimensional; use --dims 1"));
            }
            Ok(Box::new(DoubleWell1d))
        }
        "rosenbrock" => Ok(Box::new(Rosenbrock::new(dims.max(2))?)),
        "gaussian-mixture" => Ok(Box::new(GaussianMixture::seeded(dims.max(1), 6, seed)?)),
        other => Err(Error::usage(format!(
            "unknown builtin {other:?}; available: {BUILTIN_NAMES}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(oracle: &dyn LossOracle, theta: &[f64], step: f64) -> Vec<f64> {
        (0..theta.len())
            .map(|i| {
                let mut plus = theta.to_vec();
                let mut minus = theta.to_vec();
                plus[i] += step;
                minus[i] -= step;
                (oracle.value(&plus) - oracle.value(&minus)) / (2.0 * step)
            })
            .collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        diff / norm(a).max(1.0)
    }

    fn small_mlp() -> MlpOracle {
        let spec = MlpSpec {
            layer_widths: vec![2, 4, 2],
            activation: Activation::Tanh,
            loss: LossKind::CrossEntropy,
        };
        let data = ToyDataset::two_blobs(16, 1.0, 0.4, 0.0, 7).unwrap();
        MlpOracle::new(spec, data).unwrap()
    }

    #[test]
    fn quadratic_values() {
        let q = Quadratic::diagonal(&[5.0, 2.0, 1.0]).unwrap();
        let zero = ParamVector::zeros(3).unwrap();
        assert_eq!(eval_loss(&q, &zero).unwrap(), 0.0);
        let e1 = ParamVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(eval_loss(&q, &e1).unwrap(), 2.5);
    }

    #[test]
    fn rosenbrock_minimum() {
        let r = Rosenbrock::new(2).unwrap();
        let min = ParamVector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(eval_loss(&r, &min).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let q = Quadratic::diagonal(&[5.0, 2.0, 1.0]).unwrap();
        let theta = ParamVector::zeros(2).unwrap();
        assert!(matches!(eval_loss(&q, &theta), Err(Error::Usage(_))));
    }

    #[test]
    fn quadratic_gradient_is_matvec() {
        let q = Quadratic::diagonal(&[5.0, 2.0, 1.0]).unwrap();
        let theta = ParamVector::new(vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(eval_gradient(&q, &theta).unwrap(), vec![5.0, -4.0, 3.0]);
    }

    #[test]
    fn gradients_vanish_at_analytic_minimizers() {
        let cases: Vec<(Box<dyn LossOracle>, Vec<f64>)> = vec![
            (Box::new(Quadratic::diagonal(&[5.0, 2.0, 1.0]).unwrap()), vec![0.0; 3]),
            (Box::new(Rosenbrock::new(3).unwrap()), vec![1.0; 3]),
            (Box::new(DoubleWell1d), vec![1.0]),
            (Box::new(DoubleWell1d), vec![-1.0]),
        ];
        for (oracle, point) in cases {
            let theta = ParamVector::new(point).unwrap();
            let g = eval_gradient(oracle.as_ref(), &theta).unwrap();
            assert!(norm(&g) <= 1e-12, "{} gradient {:?}", oracle.id(), g);
        }
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let mix = GaussianMixture::seeded(3, 4, 11).unwrap();
        let mlp = small_mlp();
        let oracles: Vec<Box<dyn LossOracle>> = vec![
            Box::new(Quadratic::diagonal(&[5.0, 2.0, 1.0]).unwrap()),
            Box::new(DoubleWell1d),
            Box::new(Rosenbrock::new(4).unwrap()),
            Box::new(mix),
            Box::new(mlp),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for oracle in &oracles {
            for _ in 0..20 {
                let theta: Vec<f64> = (0..oracle.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let analytic = oracle.gradient(&theta);
                let fd = fd_gradient(oracle.as_ref(), &theta, 1e-5);
                assert!(
                    rel_err(&analytic, &fd) <= 1e-6,
                    "{}: rel err {}",
                    oracle.id(),
                    rel_err(&analytic, &fd)
                );
            }
        }
    }

    #[test]
    fn hvp_of_quadratic_is_exact() {
        let q = Quadratic::diagonal(&[5.0, 2.0, 1.0]).unwrap();
        let theta = ParamVector::new(vec![0.3, -0.4, 0.9]).unwrap();
        let hv = eval_hvp(&q, &theta, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(hv, vec![5.0, 0.0, 0.0]);
    }

    #[test]
    fn hvp_of_zero_vector_is_zero() {
        let r = Rosenbrock::new(3).unwrap();
        let theta = ParamVector::new(vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(eval_hvp(&r, &theta, &[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn hvp_is_linear_for_quadratic() {
        let q = Quadratic::diagonal(&[5.0, 2.0, 1.0]).unwrap();
        let theta = ParamVector::new(vec![0.1, 0.2, 0.3]).unwrap();
        let v = vec![0.4, -0.7, 1.1];
        let hv = eval_hvp(&q, &theta, &v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| 3.5 * x).collect();
        let hsv = eval_hvp(&q, &theta, &scaled).unwrap();
        for i in 0..3 {
            assert!((hsv[i] - 3.5 * hv[i]).abs() <= 1e-6 * hv[i].abs().max(1.0));
        }
    }

    #[test]
    fn hvp_is_symmetric_within_fd_tolerance() {
        let oracles: Vec<Box<dyn LossOracle>> = vec![
            Box::new(Rosenbrock::new(4).unwrap()),
            Box::new(GaussianMixture::seeded(4, 3, 5).unwrap()),
            Box::new(small_mlp()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for oracle in &oracles {
            let d = oracle.dim();
            let theta = ParamVector::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let hu = eval_hvp(oracle.as_ref(), &theta, &u).unwrap();
            let hv = eval_hvp(oracle.as_ref(), &theta, &v).unwrap();
            let lhs = dot(&v, &hu);
            let rhs = dot(&u, &hv);
            assert!(
                (lhs - rhs).abs() <= 1e-4 * lhs.abs().max(rhs.abs()).max(1.0),
                "{}: {lhs} vs {rhs}",
                oracle.id()
            );
        }
    }

    #[test]
    fn mlp_hvp_matches_dense_fd_hessian() {
        // Dense Hessian column-by-column from finite differences of the
        // analytic gradient, then H v by explicit matvec.
        let oracle = small_mlp();
        let d = oracle.dim();
        assert!(d <= 30);
        let theta = init_mlp_params(oracle.spec(), 21).unwrap();
        let step = 1e-5;
        let mut hessian = vec![vec![0.0; d]; d];
        for j in 0..d {
            let mut plus = theta.as_slice().to_vec();
            let mut minus = theta.as_slice().to_vec();
            plus[j] += step;
            minus[j] -= step;
            let gp = oracle.gradient(&plus);
            let gm = oracle.gradient(&minus);
            for i in 0..d {
                hessian[i][j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dense_hv: Vec<f64> = hessian.iter().map(|row| dot(row, &v)).collect();
        let hv = eval_hvp(&oracle, &theta, &v).unwrap();
        assert!(
            rel_err(&hv, &dense_hv) <= 1e-4,
            "rel err {}",
            rel_err(&hv, &dense_hv)
        );
    }

    #[test]
    fn train_zero_epochs_returns_initialization() {
        let spec = MlpSpec {
            layer_widths: vec![2, 3, 2],
            activation: Activation::Tanh,
            loss: LossKind::CrossEntropy,
        };
        let data = ToyDataset::two_blobs(8, 1.0, 0.3, 0.0, 1).unwrap();
        let cfg = TrainConfig { epochs: 0, lr: 0.1, batch: 4, weight_decay: 0.0, seed: 42 };
        let trained = train_mlp(&spec, &data, &cfg).unwrap();
        assert_eq!(trained, init_mlp_params(&spec, 42).unwrap());
    }

    #[test]
    fn train_is_deterministic_per_seed() {
        let spec = MlpSpec {
            layer_widths: vec![2, 8, 2],
            activation: Activation::Tanh,
            loss: LossKind::CrossEntropy,
        };
        let data = ToyDataset::two_blobs(32, 1.5, 0.4, 0.0, 2).unwrap();
        let cfg = TrainConfig { epochs: 5, lr: 0.2, batch: 8, weight_decay: 1e-4, seed: 7 };
        let a = train_mlp(&spec, &data, &cfg).unwrap();
        let b = train_mlp(&spec, &data, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn train_reaches_high_accuracy_on_separable_blobs() {
        let spec = MlpSpec {
            layer_widths: vec![2, 8, 2],
            activation: Activation::Tanh,
            loss: LossKind::CrossEntropy,
        };
        let data = ToyDataset::two_blobs(64, 2.0, 0.4, 0.0, 3).unwrap();
        let cfg = TrainConfig { epochs: 60, lr: 0.3, batch: 16, weight_decay: 0.0, seed: 5 };
        let theta = train_mlp(&spec, &data, &cfg).unwrap();
        let oracle = MlpOracle::new(spec, data).unwrap();
        let acc = oracle.accuracy(&theta).unwrap();
        assert!(acc >= 0.95, "training accuracy {acc}");
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let err = match builtin_from_name("nope", 2, 0) {
            Err(e) => e,
            Ok(_) => panic!("expected an error"),
        };
        assert!(err.to_string().contains("gaussian-mixture"));
    }

    #[test]
    fn builtin_quadratic_diag_parses_entries() {
        let q = builtin_from_name("quadratic-diag-5-2-1", 0, 0).unwrap();
        assert_eq!(q.dim(), 3);
        let theta = ParamVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(eval_loss(q.as_ref(), &theta).unwrap(), 2.5);
    }
}
