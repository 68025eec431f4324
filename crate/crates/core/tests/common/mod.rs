//! Independent oracles for integration tests. Everything here recomputes
//! results from first principles (threshold BFS, exhaustive descent, Jacobi
//! rotations) without touching the library's filtration or power-iteration
//! code paths.

#![allow(dead_code)]

use losscape::topology::Adjacency;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Neighbor list computed from scratch: coordinates via repeated div/mod,
/// offsets enumerated recursively.
pub fn neighbors_of(shape: &[usize], v: usize, adjacency: Adjacency) -> Vec<usize> {
    let n = shape.len();
    let mut coords = vec![0usize; n];
    let mut rest = v;
    for ax in (0..n).rev() {
        coords[ax] = rest % shape[ax];
        rest /= shape[ax];
    }
    let mut out = Vec::new();
    match adjacency {
        Adjacency::Axis => {
            for ax in 0..n {
                for delta in [-1i64, 1] {
                    let c = coords[ax] as i64 + delta;
                    if c >= 0 && (c as usize) < shape[ax] {
                        let mut nc = coords.clone();
                        nc[ax] = c as usize;
                        out.push(flatten(shape, &nc));
                    }
                }
            }
        }
        Adjacency::Full => {
            let mut offsets: Vec<Vec<i64>> = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for base in &offsets {
                    for d in [-1i64, 0, 1] {
                        let mut o = base.clone();
                        o.push(d);
                        next.push(o);
                    }
                }
                offsets = next;
            }
            for off in offsets {
                if off.iter().all(|&d| d == 0) {
                    continue;
                }
                let mut nc = vec![0usize; n];
                let mut ok = true;
                for ax in 0..n {
                    let c = coords[ax] as i64 + off[ax];
                    if c < 0 || c as usize >= shape[ax] {
                        ok = false;
                        break;
                    }
                    nc[ax] = c as usize;
                }
                if ok {
                    out.push(flatten(shape, &nc));
                }
            }
        }
    }
    out
}

fn flatten(shape: &[usize], coords: &[usize]) -> usize {
    let mut lin = 0;
    for (c, k) in coords.iter().zip(shape) {
        lin = lin * k + c;
    }
    lin
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePairs {
    /// Finite (birth, death) pairs with death > birth. A value-threshold
    /// sweep cannot observe zero-persistence pairs born and killed inside a
    /// plateau, so those diagonal pairs are excluded by construction.
    pub finite: Vec<(f64, f64)>,
    pub essential_birth: f64,
}

/// Brute-force 0-dimensional persistence: threshold at every distinct value
/// and count sublevel connected components by BFS, recording component
/// births and elder-rule deaths.
pub fn threshold_bfs_pairs(values: &[f64], shape: &[usize], adjacency: Adjacency) -> OraclePairs {
    let n = values.len();
    let mut thresholds = values.to_vec();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut comp_id: Vec<Option<usize>> = vec![None; n];
    let mut births: Vec<f64> = Vec::new();
    let mut finite: Vec<(f64, f64)> = Vec::new();

    let mut label = vec![usize::MAX; n];
    for &h in &thresholds {
        // BFS labeling of {v : f(v) <= h}.
        label.iter_mut().for_each(|l| *l = usize::MAX);
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if values[start] > h || label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut queue = std::collections::VecDeque::from([start]);
            label[start] = id;
            let mut members = vec![start];
            while let Some(v) = queue.pop_front() {
                for u in neighbors_of(shape, v, adjacency) {
                    if values[u] <= h && label[u] == usize::MAX {
                        label[u] = id;
                        queue.push_back(u);
                        members.push(u);
                    }
                }
            }
            comps.push(members);
        }

        for members in &comps {
            let mut old_ids: Vec<usize> = members.iter().filter_map(|&v| comp_id[v]).collect();
            old_ids.sort_unstable();
            old_ids.dedup();
            let survivor = match old_ids.len() {
                0 => {
                    births.push(h);
                    births.len() - 1
                }
                1 => old_ids[0],
                _ => {
                    let elder = *old_ids
                        .iter()
                        .min_by(|&&a, &&b| births[a].total_cmp(&births[b]).then(a.cmp(&b)))
                        .unwrap();
                    for &dead in old_ids.iter().filter(|&&id| id != elder) {
                        if h > births[dead] {
                            finite.push((births[dead], h));
                        }
                    }
                    elder
                }
            };
            for &v in members {
                comp_id[v] = Some(survivor);
            }
        }
    }

    let essential = comp_id[0].expect("grid is connected and fully covered at f_max");
    finite.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    OraclePairs { finite, essential_birth: births[essential] }
}

/// Literal steepest descent from one point: follow the smallest-valued
/// neighbor (ties to the smaller index) until no neighbor is lower in the
/// (value, index) order. No memoization.
pub fn descend_path(values: &[f64], shape: &[usize], adjacency: Adjacency, start: usize) -> usize {
    let lower = |a: usize, b: usize| values[a].total_cmp(&values[b]).then(a.cmp(&b)).is_lt();
    let mut here = start;
    loop {
        let mut best = None;
        for u in neighbors_of(shape, here, adjacency) {
            best = Some(match best {
                None => u,
                Some(b) => {
                    if lower(u, b) {
                        u
                    } else {
                        b
                    }
                }
            });
        }
        match best {
            Some(b) if lower(b, here) => here = b,
            _ => return here,
        }
    }
}

/// Exhaustive descent assignment for every grid point.
pub fn exhaustive_descent(values: &[f64], shape: &[usize], adjacency: Adjacency) -> Vec<usize> {
    (0..values.len())
        .map(|p| descend_path(values, shape, adjacency, p))
        .collect()
}

// ---------------------------------------------------------------------------
// Dense symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors)` with `eigenvectors[i]` the unit
/// eigenvector of `eigenvalues[i]`, sorted by descending magnitude.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(1e-300);

    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|i| (a[i][i], (0..n).map(|k| v[k][i]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.abs().total_cmp(&x.0.abs()));
    pairs.into_iter().unzip()
}

/// Seeded dense symmetric matrix with Gaussian entries.
#[allow(clippy::needless_range_loop)]
pub fn random_symmetric(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut b = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            b[i][j] = gauss();
        }
    }
    let mut a = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            a[i][j] = 0.5 * (b[i][j] + b[j][i]);
        }
    }
    a
}

pub fn flatten_matrix(a: &[Vec<f64>]) -> Vec<f64> {
    a.iter().flat_map(|r| r.iter().copied()).collect()
}
