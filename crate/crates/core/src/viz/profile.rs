//! Landscape profiles: the merge tree rendered as nested basin silhouettes,
//! where a branch's width at loss level `h` is the fraction of its
//! stable-manifold points with value at most `h`. Sublevel point counting is
//! the volume estimate available from grid data alone.

use crate::error::{Error, Result};
use crate::sampler::LandscapeGrid;
use crate::topology::{MergeTree, NodeKind, StableManifolds};
use crate::viz::svg::{heat_color, SvgDoc};
use serde::Serialize;
use std::collections::HashMap;

pub const DEFAULT_PROFILE_LEVELS: usize = 64;

/// One polygon of the profile: the tree edge from `node_id` up to its parent,
/// sampled at uniform loss levels between `lo` (the node's value) and `hi`
/// (its parent's value).
#[derive(Debug, Clone, Serialize)]
pub struct BranchProfile {
    pub node_id: usize,
    pub parent_id: usize,
    /// Horizontal center in [0, 1]; children sit inside their parent's span.
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    /// `(level h, half-width)` samples; widths are fractions of N, so the
    /// top edge of the tree spans unit width at `f_max`. Half-widths never
    /// increase as `h` descends toward the branch minimum.
    pub samples: Vec<(f64, f64)>,
    /// Deepest value in the branch's subtree; drives the color scale.
    pub min_value: f64,
    /// Grid index of the subtree's elder minimum.
    pub min_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileLayout {
    pub branches: Vec<BranchProfile>,
    pub levels: usize,
}

/// Compute the nested-profile layout for a merge tree.
///
/// Children are placed inside the parent at their merge level (the saddle
/// value), ordered by branch persistence descending; sibling widths at the
/// merge level sum exactly to the parent's width there.
pub fn layout_profile(
    tree: &MergeTree,
    manifolds: &StableManifolds,
    grid: &LandscapeGrid,
    levels: usize,
) -> Result<ProfileLayout> {
    if levels < 2 {
        return Err(Error::usage(format!("profile needs at least 2 levels, got {levels}")));
    }
    if tree.grid_digest != manifolds.grid_digest || tree.grid_digest != grid.digest() {
        return Err(Error::Provenance(
            "merge tree and manifolds were not derived from this grid".to_string(),
        ));
    }

    let n = grid.len() as f64;
    let values = grid.values();

    // Values of each minimum's stable-manifold points.
    let mut buckets: HashMap<usize, Vec<f64>> = HashMap::new();
    for (point, &min) in manifolds.assignment.iter().enumerate() {
        buckets.entry(min).or_default().push(values[point]);
    }

    // Sorted subtree value lists, bottom-up. Children always carry smaller
    // ids than their parents, so ascending id order is a valid schedule.
    let mut subtree: Vec<Vec<f64>> = vec![Vec::new(); tree.nodes.len()];
    for node in &tree.nodes {
        let mut vals = match node.kind {
            NodeKind::Minimum => buckets.remove(&node.grid_index).unwrap_or_default(),
            _ => {
                let mut merged = Vec::new();
                for &c in &node.children {
                    debug_assert!(c < node.id, "children must precede parents");
                    merged.extend_from_slice(&subtree[c]);
                }
                merged
            }
        };
        vals.sort_unstable_by(f64::total_cmp);
        subtree[node.id] = vals;
    }

    let width_at = |node: usize, h: f64| -> f64 {
        let vals = &subtree[node];
        vals.partition_point(|&v| v <= h) as f64 / n
    };

    // Horizontal centers, top-down from the root edge at [0, 1].
    let mut center = vec![f64::NAN; tree.nodes.len()];
    let mut stack = vec![tree.root];
    center[tree.root] = 0.5;
    while let Some(parent) = stack.pop() {
        let node = &tree.nodes[parent];
        if node.children.is_empty() {
            continue;
        }
        let level = node.value;
        let (span, mid) = if node.kind == NodeKind::Root {
            (1.0, 0.5)
        } else {
            (width_at(parent, level), center[parent])
        };
        let mut order: Vec<usize> = node.children.clone();
        // Branch persistence: parent value minus the subtree's deepest value.
        order.sort_by(|&a, &b| {
            let pa = level - subtree[a].first().copied().unwrap_or(level);
            let pb = level - subtree[b].first().copied().unwrap_or(level);
            pb.total_cmp(&pa).then(a.cmp(&b))
        });
        let mut acc = mid - span / 2.0;
        for &c in &order {
            let w = width_at(c, level);
            center[c] = acc + w / 2.0;
            acc += w;
            stack.push(c);
        }
    }

    let mut branches = Vec::new();
    for node in &tree.nodes {
        if node.kind == NodeKind::Root {
            continue;
        }
        let parent = node.parent.expect("non-root nodes have parents");
        let (lo, hi) = (node.value, tree.nodes[parent].value);
        let samples: Vec<(f64, f64)> = (0..levels)
            .map(|j| {
                let h = if levels == 1 {
                    lo
                } else {
                    lo + (hi - lo) * j as f64 / (levels - 1) as f64
                };
                (h, width_at(node.id, h) / 2.0)
            })
            .collect();
        // Elder minimum of the subtree: walk down the deepest child chain.
        let mut cursor = node.id;
        while !tree.nodes[cursor].children.is_empty() {
            cursor = *tree.nodes[cursor]
                .children
                .iter()
                .min_by(|&&a, &&b| {
                    let va = subtree[a].first().copied().unwrap_or(f64::INFINITY);
                    let vb = subtree[b].first().copied().unwrap_or(f64::INFINITY);
                    va.total_cmp(&vb).then(a.cmp(&b))
                })
                .expect("non-leaf nodes have children");
        }
        branches.push(BranchProfile {
            node_id: node.id,
            parent_id: parent,
            center: center[node.id],
            lo,
            hi,
            samples,
            min_value: subtree[node.id].first().copied().unwrap_or(lo),
            min_index: tree.nodes[cursor].grid_index,
        });
    }
    Ok(ProfileLayout { branches, levels })
}

/// Render a profile layout as nested filled silhouettes on a value axis.
pub fn render_profile(layout: &ProfileLayout) -> String {
    let (width, height) = (640.0, 440.0);
    let (ml, mr, mt, mb) = (60.0, 20.0, 20.0, 40.0);
    let plot_w = width - ml - mr;
    let plot_h = height - mt - mb;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut deepest = f64::INFINITY;
    for b in &layout.branches {
        lo = lo.min(b.lo);
        hi = hi.max(b.hi);
        deepest = deepest.min(b.min_value);
    }
    if layout.branches.is_empty() {
        lo = 0.0;
        hi = 0.0;
    }
    let span = hi - lo;
    let y_of = |v: f64| {
        if span == 0.0 {
            mt + plot_h / 2.0
        } else {
            mt + (hi - v) / span * plot_h
        }
    };
    let x_of = |u: f64| ml + u * plot_w;

    let mut doc = SvgDoc::new(width, height);
    for branch in &layout.branches {
        let mut points = Vec::with_capacity(branch.samples.len() * 2);
        for &(h, half) in &branch.samples {
            points.push((x_of(branch.center - half), y_of(h)));
        }
        for &(h, half) in branch.samples.iter().rev() {
            points.push((x_of(branch.center + half), y_of(h)));
        }
        let t = if span == 0.0 {
            0.5
        } else {
            (branch.min_value - deepest) / span
        };
        doc.polygon(&points, &heat_color(t), "#222222");
    }
    // Value axis on the left.
    doc.line(ml - 8.0, mt, ml - 8.0, mt + plot_h, "#333333", 1.0);
    doc.text(ml - 12.0, mt + 4.0, 11.0, "end", &crate::viz::svg::fmt_num(hi));
    doc.text(ml - 12.0, mt + plot_h + 4.0, 11.0, "end", &crate::viz::svg::fmt_num(lo));
    doc.finish()
}
