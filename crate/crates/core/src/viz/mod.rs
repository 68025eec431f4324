//! Deterministic SVG renderers: persistence barcodes, merge trees, nested
//! landscape profiles, and 2-D contour maps. Identical inputs always produce
//! byte-identical documents.

mod contour;
mod profile;
mod svg;

pub use contour::{contour_levels, contour_segments, render_contour, Segment};
pub use profile::{layout_profile, render_profile, BranchProfile, ProfileLayout, DEFAULT_PROFILE_LEVELS};

use crate::topology::{Barcode, MergeTree, NodeKind, PersistencePair};
use svg::{fmt_num, SvgDoc};

const FINITE_BAR: &str = "#4878a8";
const ESSENTIAL_BAR: &str = "#c0504d";

/// Persistence barcode: one horizontal bar per pair on a value axis, sorted
/// by birth then persistence, with the essential bar color-distinguished.
pub fn render_barcode(barcode: &Barcode) -> String {
    let mut pairs: Vec<&PersistencePair> = barcode.pairs.iter().collect();
    pairs.sort_by(|a, b| {
        a.birth
            .total_cmp(&b.birth)
            .then(a.persistence.total_cmp(&b.persistence))
            .then(a.minimum_index.cmp(&b.minimum_index))
    });

    let lo = pairs.iter().map(|p| p.birth).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.death).fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;

    let bar_h = 12.0;
    let gap = 6.0;
    let (ml, mr, mt, mb) = (60.0, 20.0, 16.0, 36.0);
    let plot_w = 560.0;
    let height = mt + pairs.len() as f64 * (bar_h + gap) + mb;
    let width = ml + plot_w + mr;
    let x_of = |v: f64| {
        if span == 0.0 {
            ml
        } else {
            ml + (v - lo) / span * plot_w
        }
    };

    let mut doc = SvgDoc::new(width, height);
    for (i, pair) in pairs.iter().enumerate() {
        let y = mt + i as f64 * (bar_h + gap);
        let x0 = x_of(pair.birth);
        let x1 = x_of(pair.death);
        let fill = if pair.essential { ESSENTIAL_BAR } else { FINITE_BAR };
        doc.rect(x0, y, (x1 - x0).max(1.0), bar_h, fill);
    }
    let axis_y = height - mb + 8.0;
    doc.line(ml, axis_y, ml + plot_w, axis_y, "#333333", 1.0);
    doc.text(ml, axis_y + 14.0, 11.0, "start", &fmt_num(lo));
    doc.text(ml + plot_w, axis_y + 14.0, 11.0, "end", &fmt_num(hi));
    doc.finish()
}

/// Merge tree drawn as a dendrogram: node height is its loss value, leaves
/// are laid out in traversal order, saddles sit at the mean of their
/// children's positions.
pub fn render_merge_tree(tree: &MergeTree) -> String {
    let n = tree.nodes.len();
    // Leaf x positions via iterative DFS in stored child order.
    let mut leaf_x = vec![f64::NAN; n];
    let mut next_leaf = 0.0;
    let mut stack = vec![(tree.root, false)];
    let mut post_order = Vec::with_capacity(n);
    while let Some((id, visited)) = stack.pop() {
        if visited {
            post_order.push(id);
            continue;
        }
        stack.push((id, true));
        let node = &tree.nodes[id];
        if node.children.is_empty() {
            leaf_x[id] = next_leaf;
            next_leaf += 1.0;
        } else {
            for &c in node.children.iter().rev() {
                stack.push((c, false));
            }
        }
    }
    let mut x = leaf_x;
    for &id in &post_order {
        let node = &tree.nodes[id];
        if !node.children.is_empty() {
            x[id] = node.children.iter().map(|&c| x[c]).sum::<f64>() / node.children.len() as f64;
        }
    }

    let lo = tree.nodes.iter().map(|nd| nd.value).fold(f64::INFINITY, f64::min);
    let hi = tree.nodes[tree.root].value;
    let span = hi - lo;
    let leaves = next_leaf.max(1.0);
    let (ml, mr, mt, mb) = (60.0, 30.0, 20.0, 30.0);
    let plot_w = (leaves - 1.0).max(1.0) * 60.0;
    let plot_h = 380.0;
    let (width, height) = (ml + plot_w + mr, mt + plot_h + mb);
    let x_of = |u: f64| {
        if leaves <= 1.0 {
            ml + plot_w / 2.0
        } else {
            ml + u / (leaves - 1.0) * plot_w
        }
    };
    let y_of = |v: f64| {
        if span == 0.0 {
            mt + plot_h / 2.0
        } else {
            mt + (hi - v) / span * plot_h
        }
    };

    let mut doc = SvgDoc::new(width, height);
    for node in &tree.nodes {
        if let Some(p) = node.parent {
            let (cx, cy) = (x_of(x[node.id]), y_of(node.value));
            let (px, py) = (x_of(x[p]), y_of(tree.nodes[p].value));
            doc.line(cx, cy, cx, py, "#555555", 1.5);
            doc.line(cx, py, px, py, "#555555", 1.5);
        }
    }
    for node in &tree.nodes {
        let fill = match node.kind {
            NodeKind::Minimum => FINITE_BAR,
            NodeKind::Saddle => "#dd8452",
            NodeKind::Root => "#333333",
        };
        doc.circle(x_of(x[node.id]), y_of(node.value), 3.5, fill);
    }
    doc.line(ml - 10.0, mt, ml - 10.0, mt + plot_h, "#333333", 1.0);
    doc.text(ml - 14.0, mt + 4.0, 11.0, "end", &fmt_num(hi));
    doc.text(ml - 14.0, mt + plot_h + 4.0, 11.0, "end", &fmt_num(lo));
    doc.finish()
}
