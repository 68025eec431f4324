//! Scalar landscape summaries, chiefly the saddle-minimum average distance:
//!
//! `SMAD = (1/|S|) * sum_i (p_i / R) * (w_i / N)`
//!
//! over the finite saddle-minimum pairs `S`, with persistences `p_i`
//! normalized by the total value range `R` and weighted by the fraction of
//! grid points in each minimum's stable manifold. Lower values mean
//! smoother, better-connected landscapes.

use crate::error::{Error, Result};
use crate::sampler::LandscapeGrid;
use crate::spectral::{SpectralResult, TraceEstimate};
use crate::topology::{Barcode, PersistencePair, StableManifolds};
use serde::{Deserialize, Serialize};

/// One term of the SMAD sum, exposed so the metric is auditable pair by pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairContribution {
    pub minimum_index: usize,
    pub persistence: f64,
    pub weight: usize,
    /// `(p_i / R) * (w_i / N)`
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmadReport {
    pub smad: f64,
    /// `|S|`, the number of finite saddle-minimum pairs.
    pub pair_count: usize,
    /// `R = f_max - f_min`.
    pub value_range: f64,
    /// `N`, the number of grid points.
    pub point_count: usize,
    pub contributions: Vec<PairContribution>,
}

fn check_provenance(grid: &LandscapeGrid, barcode: &Barcode, manifolds: &StableManifolds) -> Result<()> {
    let digest = grid.digest();
    if barcode.grid_digest != digest || manifolds.grid_digest != digest {
        return Err(Error::Provenance(
            "barcode and manifolds were not derived from this grid".to_string(),
        ));
    }
    if barcode.adjacency != manifolds.adjacency {
        return Err(Error::Provenance(
            "barcode and manifolds use different adjacencies".to_string(),
        ));
    }
    Ok(())
}

/// SMAD over the finite pairs of a barcode.
///
/// The essential pair is excluded: its termination at `f_max` is not a
/// saddle, and including it would force SMAD toward 1 on unimodal
/// landscapes. Unimodal (`|S| = 0`) and constant (`R = 0`) grids score 0,
/// the maximally smooth extreme.
pub fn smad(barcode: &Barcode, manifolds: &StableManifolds, grid: &LandscapeGrid) -> Result<SmadReport> {
    check_provenance(grid, barcode, manifolds)?;
    let range = grid.value_range();
    let n = grid.len();
    let finite: Vec<&PersistencePair> = barcode.finite_pairs().collect();

    if finite.is_empty() || range == 0.0 {
        return Ok(SmadReport {
            smad: 0.0,
            pair_count: finite.len(),
            value_range: range,
            point_count: n,
            contributions: Vec::new(),
        });
    }

    let contributions: Vec<PairContribution> = finite
        .iter()
        .map(|pair| {
            let weight = manifolds.size_of(pair.minimum_index);
            let term = (pair.persistence / range) * (weight as f64 / n as f64);
            PairContribution {
                minimum_index: pair.minimum_index,
                persistence: pair.persistence,
                weight,
                term,
            }
        })
        .collect();
    let sum: f64 = contributions.iter().map(|c| c.term).sum();
    Ok(SmadReport {
        smad: sum / finite.len() as f64,
        pair_count: finite.len(),
        value_range: range,
        point_count: n,
        contributions,
    })
}

/// Spread of the finite persistences: max minus min, 0 with fewer than two
/// finite pairs. (The global value range `R` is a plausible alternative
/// reading; reports carry the definition used.)
pub fn persistence_range(barcode: &Barcode) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count = 0;
    for pair in barcode.finite_pairs() {
        lo = lo.min(pair.persistence);
        hi = hi.max(pair.persistence);
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub shape: Vec<usize>,
    pub point_count: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub value_range: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
}

/// Full multi-metric view of one landscape, JSON-serializable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub schema_version: u32,
    pub smad: SmadReport,
    pub persistence_range: f64,
    /// Which definition `persistence_range` uses.
    pub persistence_range_definition: String,
    /// Total bars including the essential one.
    pub bar_count: usize,
    pub mean_finite_persistence: f64,
    pub max_finite_persistence: f64,
    /// Neighbor structure the topology stage used; saddle values depend on it.
    pub adjacency: crate::topology::Adjacency,
    /// Persistence threshold applied before this report, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simplify_threshold: Option<f64>,
    pub pairs: Vec<PersistencePair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_trace: Option<TraceEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues_used: Option<Vec<f64>>,
    pub grid: GridSummary,
}

pub const SCHEMA_VERSION: u32 = 1;

/// Assemble the report from consistent pipeline outputs. Spectral data is
/// optional because grids ingested from files carry at most the eigenvalues
/// used during sampling.
pub fn assemble_report(
    grid: &LandscapeGrid,
    barcode: &Barcode,
    manifolds: &StableManifolds,
    spectral: Option<&SpectralResult>,
    trace: Option<&TraceEstimate>,
) -> Result<LandscapeReport> {
    check_provenance(grid, barcode, manifolds)?;
    let smad_report = smad(barcode, manifolds, grid)?;
    let finite: Vec<f64> = barcode.finite_pairs().map(|p| p.persistence).collect();
    let mean_finite = if finite.is_empty() {
        0.0
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let max_finite = finite.iter().cloned().fold(0.0_f64, f64::max);
    let max_eigenvalue = spectral
        .map(|s| {
            s.eigenvalues
                .iter()
                .cloned()
                .fold(0.0_f64, |a, b| if b.abs() > a.abs() { b } else { a })
        })
        .or_else(|| {
            grid.meta.eigenvalues.as_ref().map(|ev| {
                ev.iter().cloned().fold(0.0_f64, |a, b| if b.abs() > a.abs() { b } else { a })
            })
        });

    Ok(LandscapeReport {
        schema_version: SCHEMA_VERSION,
        smad: smad_report,
        persistence_range: persistence_range(barcode),
        persistence_range_definition: "max_minus_min_finite".to_string(),
        bar_count: barcode.pairs.len(),
        mean_finite_persistence: mean_finite,
        max_finite_persistence: max_finite,
        adjacency: barcode.adjacency,
        simplify_threshold: None,
        pairs: barcode.pairs.clone(),
        spectral: spectral.map(|s| SpectralSummary {
            eigenvalues: s.eigenvalues.clone(),
            residuals: s.residuals.clone(),
            iterations: s.iterations.clone(),
            converged: s.converged.clone(),
        }),
        max_eigenvalue,
        hessian_trace: trace.copied(),
        eigenvalues_used: spectral
            .map(|s| s.eigenvalues.clone())
            .or_else(|| grid.meta.eigenvalues.clone()),
        grid: GridSummary {
            shape: grid.shape().to_vec(),
            point_count: grid.len(),
            f_min: grid.f_min(),
            f_max: grid.f_max(),
            value_range: grid.value_range(),
            oracle_id: grid.meta.oracle_id.clone(),
            origin_digest: grid.meta.origin_digest.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::LandscapeGrid;
    use crate::topology::{build_merge_tree, simplify, stable_manifolds, Adjacency};
    use proptest::prelude::*;

    fn pipeline(values: Vec<f64>, shape: &[usize]) -> (LandscapeGrid, Barcode, StableManifolds) {
        let grid = LandscapeGrid::from_values(shape, values).unwrap();
        let (_, barcode) = build_merge_tree(&grid, Adjacency::Axis).unwrap();
        let manifolds = stable_manifolds(&grid, Adjacency::Axis).unwrap();
        (grid, barcode, manifolds)
    }

    #[test]
    fn worked_example_is_one_quarter() {
        let (grid, barcode, manifolds) = pipeline(vec![0.0, 2.0, 1.0, 2.0, 0.0], &[5]);
        let report = smad(&barcode, &manifolds, &grid).unwrap();
        assert_eq!(report.smad, 0.25);
        assert_eq!(report.pair_count, 2);
        assert_eq!(report.value_range, 2.0);
        assert_eq!(report.point_count, 5);
        // (1/2)(1/5) and (2/2)(2/5)
        assert_eq!(report.contributions[0].term, 0.1);
        assert_eq!(report.contributions[1].term, 0.4);
    }

    #[test]
    fn unimodal_grid_scores_zero() {
        let values: Vec<f64> = (-3..=3).map(|i| (i * i) as f64).collect();
        let (grid, barcode, manifolds) = pipeline(values, &[7]);
        let report = smad(&barcode, &manifolds, &grid).unwrap();
        assert_eq!(report.smad, 0.0);
        assert_eq!(report.pair_count, 0);
    }

    #[test]
    fn constant_grid_scores_zero() {
        let (grid, barcode, manifolds) = pipeline(vec![4.0; 9], &[3, 3]);
        let report = smad(&barcode, &manifolds, &grid).unwrap();
        assert_eq!(report.smad, 0.0);
        assert_eq!(report.value_range, 0.0);
    }

    #[test]
    fn positive_affine_transform_preserves_smad() {
        let base = vec![0.0, 2.0, 1.0, 2.0, 0.0];
        let (grid, barcode, manifolds) = pipeline(base.clone(), &[5]);
        let reference = smad(&barcode, &manifolds, &grid).unwrap().smad;
        let transformed: Vec<f64> = base.iter().map(|v| 3.0 * v + 10.0).collect();
        let (tg, tb, tm) = pipeline(transformed, &[5]);
        let value = smad(&tb, &tm, &tg).unwrap().smad;
        assert!((value - reference).abs() <= 1e-12);
    }

    #[test]
    fn provenance_mismatch_is_rejected() {
        let (_, barcode, manifolds) = pipeline(vec![0.0, 2.0, 1.0, 2.0, 0.0], &[5]);
        let other = LandscapeGrid::from_values(&[5], vec![0.0, 1.0, 0.5, 1.0, 0.0]).unwrap();
        assert!(matches!(
            smad(&barcode, &manifolds, &other),
            Err(Error::Provenance(_))
        ));
    }

    #[test]
    fn persistence_range_cases() {
        let (_, barcode, _) = pipeline(vec![0.0, 2.0, 1.0, 2.0, 0.0], &[5]);
        assert_eq!(persistence_range(&barcode), 1.0); // {1, 2}

        let (_, single, _) = pipeline(vec![0.0, 2.0, 1.0, 2.0, 2.0], &[5]);
        assert_eq!(single.finite_pairs().count(), 1);
        assert_eq!(persistence_range(&single), 0.0);

        let (_, unimodal, _) = pipeline(vec![0.0, 1.0, 2.0], &[3]);
        assert_eq!(persistence_range(&unimodal), 0.0);
    }

    #[test]
    fn simplified_smad_uses_reassigned_weights() {
        let (grid, barcode, manifolds) = pipeline(vec![0.0, 2.0, 1.0, 2.0, 0.0], &[5]);
        let (tree, _) = build_merge_tree(&grid, Adjacency::Axis).unwrap();
        let (_, b2, m2) = simplify(&tree, &barcode, &manifolds, 1.5).unwrap();
        let report = smad(&b2, &m2, &grid).unwrap();
        // Single remaining pair: (2/2) * (2/5) = 0.4
        assert_eq!(report.pair_count, 1);
        assert_eq!(report.smad, 0.4);
        let total: usize = m2.sizes.values().sum();
        assert_eq!(total, grid.len());
    }

    #[test]
    fn report_for_double_well_pipeline() {
        let (grid, barcode, manifolds) = pipeline(vec![0.0, 2.0, 1.0, 2.0, 0.0], &[5]);
        let report = assemble_report(&grid, &barcode, &manifolds, None, None).unwrap();
        assert_eq!(report.smad.smad, 0.25);
        assert_eq!(report.bar_count, 3);
        assert_eq!(report.persistence_range, 1.0);
        assert_eq!(report.mean_finite_persistence, 1.5);
        assert_eq!(report.max_finite_persistence, 2.0);
    }

    #[test]
    fn report_for_unimodal_pipeline() {
        let values: Vec<f64> = (-5..=5).map(|i| 0.5 * (i * i) as f64).collect();
        let (grid, barcode, manifolds) = pipeline(values, &[11]);
        let report = assemble_report(&grid, &barcode, &manifolds, None, None).unwrap();
        assert_eq!(report.smad.smad, 0.0);
        assert_eq!(report.bar_count, 1);
    }

    #[test]
    fn report_round_trips_through_json() {
        let (grid, barcode, manifolds) = pipeline(vec![0.0, 2.0, 1.0, 2.0, 0.0], &[5]);
        let report = assemble_report(&grid, &barcode, &manifolds, None, None).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: LandscapeReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        let json2 = serde_json::to_string(&back).unwrap();
        assert_eq!(json, json2);
    }

    proptest! {
        /// SMAD stays within [0, 1] and is invariant under positive affine
        /// maps on random discrete grids.
        #[test]
        fn smad_bounds_and_affine_invariance(
            raw in proptest::collection::vec(0u8..=24, 25),
            a in prop::sample::select(vec![0.5f64, 3.0]),
            b in prop::sample::select(vec![-7.0f64, 10.0]),
        ) {
            let values: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let (grid, barcode, manifolds) = pipeline(values.clone(), &[5, 5]);
            let report = smad(&barcode, &manifolds, &grid).unwrap();
            prop_assert!((0.0..=1.0).contains(&report.smad));

            let mapped: Vec<f64> = values.iter().map(|v| a * v + b).collect();
            let (mg, mb, mm) = pipeline(mapped, &[5, 5]);
            let mapped_report = smad(&mb, &mm, &mg).unwrap();
            prop_assert!((mapped_report.smad - report.smad).abs() <= 1e-12);
        }
    }
}
