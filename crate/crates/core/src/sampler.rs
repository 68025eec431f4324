//! Subspace grid construction: evaluate the loss on the Cartesian product of
//! axis offsets along orthonormal directions,
//! `f(a_1..a_n) = L(theta + sum_i a_i d_i)`.

use crate::error::{Error, Result};
use crate::oracle::{LossOracle, ParamVector};
use crate::spectral::SpectralResult;
use crate::vecmath::{dot, hash_f64s, norm};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How per-axis ranges are derived from a shared base range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AxisScaling {
    /// Same half-width `r` on every axis.
    #[default]
    Uniform,
    /// `r_i = r / sqrt(max(|lambda_i|, 1e-8))`: wider sampling along flatter
    /// eigendirections, with a floor guarding near-zero eigenvalues.
    InverseEigenvalue,
}

const LAMBDA_FLOOR: f64 = 1e-8;

/// Origin, orthonormal directions, and per-axis grids defining the sampled
/// subspace. Step counts are odd so the unperturbed model (`alpha = 0`) is
/// always on-grid.
#[derive(Debug, Clone)]
pub struct SubspaceSpec {
    pub origin: ParamVector,
    pub directions: Vec<Vec<f64>>,
    pub ranges: Vec<f64>,
    pub steps: Vec<usize>,
    pub eigenvalues: Option<Vec<f64>>,
}

impl SubspaceSpec {
    pub fn new(
        origin: ParamVector,
        directions: Vec<Vec<f64>>,
        ranges: Vec<f64>,
        steps: Vec<usize>,
        eigenvalues: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = directions.len();
        if n == 0 {
            return Err(Error::usage("subspace needs at least one direction"));
        }
        if ranges.len() != n || steps.len() != n {
            return Err(Error::usage("directions, ranges, and steps must have equal length"));
        }
        if let Some(ev) = &eigenvalues {
            if ev.len() != n {
                return Err(Error::usage("eigenvalues must match the direction count"));
            }
        }
        let d = origin.len();
        for (i, dir) in directions.iter().enumerate() {
            if dir.len() != d {
                return Err(Error::usage(format!(
                    "direction {i} has dimension {} but origin has {d}",
                    dir.len()
                )));
            }
            if (norm(dir) - 1.0).abs() > 1e-8 {
                return Err(Error::usage(format!("direction {i} is not unit length")));
            }
            for (j, other) in directions.iter().enumerate().take(i) {
                if dot(dir, other).abs() > 1e-8 {
                    return Err(Error::usage(format!("directions {j} and {i} are not orthogonal")));
                }
            }
        }
        for (i, &r) in ranges.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::usage(format!("range for axis {i} must be positive, got {r}")));
            }
        }
        for (i, &k) in steps.iter().enumerate() {
            if k < 3 || k % 2 == 0 {
                return Err(Error::usage(format!(
                    "steps for axis {i} must be an odd integer >= 3 so alpha = 0 \
                     (the unperturbed model) is sampled; got {k}"
                )));
            }
        }
        Ok(SubspaceSpec { origin, directions, ranges, steps, eigenvalues })
    }

    pub fn n_axes(&self) -> usize {
        self.directions.len()
    }

    pub fn n_points(&self) -> usize {
        self.steps.iter().product()
    }
}

/// Take the top-n directions from a spectral result and attach grid geometry.
pub fn build_subspace(
    origin: ParamVector,
    spectral: &SpectralResult,
    n: usize,
    range: f64,
    steps: usize,
    scaling: AxisScaling,
) -> Result<SubspaceSpec> {
    if n == 0 || n > spectral.k() {
        return Err(Error::usage(format!(
            "subspace dimension n = {n} must satisfy 1 <= n <= {} (available eigenpairs)",
            spectral.k()
        )));
    }
    if !range.is_finite() || range <= 0.0 {
        return Err(Error::usage(format!("range must be positive, got {range}")));
    }
    let eigenvalues: Vec<f64> = spectral.eigenvalues[..n].to_vec();
    let ranges: Vec<f64> = match scaling {
        AxisScaling::Uniform => vec![range; n],
        AxisScaling::InverseEigenvalue => eigenvalues
            .iter()
            .map(|l| range / l.abs().max(LAMBDA_FLOOR).sqrt())
            .collect(),
    };
    SubspaceSpec::new(
        origin,
        spectral.eigenvectors[..n].to_vec(),
        ranges,
        vec![steps; n],
        Some(eigenvalues),
    )
}

/// Symmetric axis coordinates in `[-range, range]`.
///
/// Built as mirrored halves so negation pairs are bit-exact and odd step
/// counts place 0.0 exactly at the center. Even counts (ingested grids only)
/// straddle zero symmetrically.
pub fn axis_coords(range: f64, steps: usize) -> Vec<f64> {
    let mut coords = vec![0.0; steps];
    let denom = (steps - 1) as f64;
    for j in 0..steps / 2 {
        let t = (steps - 1 - 2 * j) as f64;
        let v = range * t / denom;
        coords[j] = -v;
        coords[steps - 1 - j] = v;
    }
    coords
}

/// Free-form metadata carried by a grid; the named fields are what the
/// pipeline itself uses, everything else round-trips untouched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_id: Option<String>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// An n-dimensional scalar field of loss values.
///
/// `values` is flat row-major with the last axis fastest:
/// `values[i_1 * (k_2*..*k_n) + ... + i_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    shape: Vec<usize>,
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
    pub meta: GridMeta,
}

impl LandscapeGrid {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>, meta: GridMeta) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::usage("grid needs at least one axis"));
        }
        let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
        let n: usize = shape.iter().product();
        if n == 0 {
            return Err(Error::usage("grid axes must be non-empty"));
        }
        if values.len() != n {
            return Err(Error::usage(format!(
                "grid has {} values but the shape {:?} requires {n}",
                values.len(),
                shape
            )));
        }
        for (ax, coords) in axes.iter().enumerate() {
            if coords.iter().any(|c| !c.is_finite()) {
                return Err(Error::usage(format!("axis {ax} has non-finite coordinates")));
            }
            for w in coords.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::usage(format!(
                        "axis {ax} coordinates must be strictly increasing"
                    )));
                }
            }
            let k = coords.len();
            for j in 0..k / 2 {
                let lo = coords[j];
                let hi = coords[k - 1 - j];
                if (lo + hi).abs() > 1e-9 * hi.abs().max(1e-12) {
                    return Err(Error::usage(format!(
                        "axis {ax} coordinates are not symmetric about 0"
                    )));
                }
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "grid value at linear index {i} is {}",
                values[i]
            )));
        }
        Ok(LandscapeGrid { shape, axes, values, meta })
    }

    /// Grid over bare values with synthesized unit-spaced symmetric axes.
    /// This is the entry point for ingested data that carries no geometry.
    pub fn from_values(shape: &[usize], values: Vec<f64>) -> Result<Self> {
        if shape.iter().any(|&k| k < 2) {
            return Err(Error::usage("every axis needs at least 2 points"));
        }
        let axes = shape
            .iter()
            .map(|&k| axis_coords((k - 1) as f64 / 2.0, k))
            .collect();
        LandscapeGrid::new(axes, values, GridMeta::default())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Total number of grid points N.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn f_min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn f_max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// R = f_max - f_min, the total range of loss values.
    pub fn value_range(&self) -> f64 {
        self.f_max() - self.f_min()
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.shape.len();
        let mut s = vec![1; n];
        for i in (0..n.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.shape[i + 1];
        }
        s
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut multi = vec![0; self.shape.len()];
        for (i, s) in self.strides().iter().enumerate() {
            multi[i] = linear / s;
            linear %= s;
        }
        multi
    }

    /// Axis coordinates of a linear index.
    pub fn coords(&self, linear: usize) -> Vec<f64> {
        self.multi_index(linear)
            .iter()
            .enumerate()
            .map(|(ax, &i)| self.axes[ax][i])
            .collect()
    }

    /// FNV-1a digest over shape and value bits; used to tie barcodes and
    /// manifolds back to the grid they came from.
    pub fn digest(&self) -> u64 {
        let shape_bits: Vec<f64> = self.shape.iter().map(|&k| k as f64).collect();
        hash_f64s(&shape_bits) ^ hash_f64s(&self.values).rotate_left(1)
    }
}

/// Evaluate the loss over the full Cartesian grid.
///
/// Exactly `prod(k_i)` oracle evaluations, embarrassingly parallel, with each
/// result written to its own slot so the output is byte-identical regardless
/// of thread count. The center point is the untouched origin, so
/// `values[center] == L(theta)` exactly.
pub fn sample_grid(oracle: &dyn LossOracle, spec: &SubspaceSpec) -> Result<LandscapeGrid> {
    if spec.origin.len() != oracle.dim() {
        return Err(Error::usage(format!(
            "subspace origin has dimension {} but oracle expects {}",
            spec.origin.len(),
            oracle.dim()
        )));
    }
    let axes: Vec<Vec<f64>> = spec
        .ranges
        .iter()
        .zip(&spec.steps)
        .map(|(&r, &k)| axis_coords(r, k))
        .collect();
    let shape: Vec<usize> = spec.steps.clone();
    let n_points: usize = shape.iter().product();
    let n_axes = shape.len();
    let mut strides = vec![1usize; n_axes];
    for i in (0..n_axes.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    let origin = spec.origin.as_slice();

    let values: Vec<f64> = (0..n_points)
        .into_par_iter()
        .map_init(
            || vec![0.0; origin.len()],
            |point, linear| {
                point.copy_from_slice(origin);
                let mut rem = linear;
                for ax in 0..n_axes {
                    let idx = rem / strides[ax];
                    rem %= strides[ax];
                    let alpha = axes[ax][idx];
                    if alpha != 0.0 {
                        for (p, d) in point.iter_mut().zip(&spec.directions[ax]) {
                            *p += alpha * d;
                        }
                    }
                }
                oracle.value(point)
            },
        )
        .collect();

    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        let multi: Vec<f64> = {
            let mut rem = bad;
            (0..n_axes)
                .map(|ax| {
                    let idx = rem / strides[ax];
                    rem %= strides[ax];
                    axes[ax][idx]
                })
                .collect()
        };
        return Err(Error::numeric(format!(
            "loss is {} at grid coordinate alpha = {:?}",
            values[bad], multi
        )));
    }

    let meta = GridMeta {
        eigenvalues: spec.eigenvalues.clone(),
        origin_digest: Some(format!("{:016x}", spec.origin.digest())),
        oracle_id: Some(oracle.id()),
        extra: serde_json::Map::new(),
    };
    LandscapeGrid::new(axes, values, meta)
}
