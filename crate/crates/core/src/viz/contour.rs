//! Marching-squares contours plus filled heat cells for 2-D grids.

use crate::error::{Error, Result};
use crate::sampler::LandscapeGrid;
use crate::viz::svg::{fmt_num, heat_color, SvgDoc};

/// A contour segment in index space: x along axis 1 (fastest), y along axis 0.
pub type Segment = [(f64, f64); 2];

/// Corner layout per cell, values at (row, col) offsets:
/// c0 = (0,0), c1 = (0,1), c2 = (1,1), c3 = (1,0).
/// Edges: 0 = c0-c1 (top), 1 = c1-c2 (right), 2 = c3-c2 (bottom), 3 = c0-c3 (left).
fn edge_point(edge: usize, row: f64, col: f64, c: [f64; 4], level: f64) -> (f64, f64) {
    let (a, b) = match edge {
        0 => (c[0], c[1]),
        1 => (c[1], c[2]),
        2 => (c[3], c[2]),
        3 => (c[0], c[3]),
        _ => unreachable!(),
    };
    let t = (level - a) / (b - a);
    match edge {
        0 => (col + t, row),
        1 => (col + 1.0, row + t),
        2 => (col + t, row + 1.0),
        3 => (col, row + t),
        _ => unreachable!(),
    }
}

/// All iso-line segments of one level, cell by cell. A corner counts as
/// inside when its value is strictly below the level; the ambiguous diagonal
/// cases are resolved by the cell-center mean. Requires a 2-D grid.
pub fn contour_segments(grid: &LandscapeGrid, level: f64) -> Vec<Segment> {
    let shape = grid.shape();
    let (rows, cols) = (shape[0], shape[1]);
    let values = grid.values();
    let at = |r: usize, c: usize| values[r * cols + c];
    let mut segments = Vec::new();

    for r in 0..rows - 1 {
        for col in 0..cols - 1 {
            let c = [at(r, col), at(r, col + 1), at(r + 1, col + 1), at(r + 1, col)];
            let mut case = 0usize;
            for (bit, v) in c.iter().enumerate() {
                if *v < level {
                    case |= 1 << bit;
                }
            }
            let (rf, cf) = (r as f64, col as f64);
            let mut emit = |e1: usize, e2: usize| {
                segments.push([
                    edge_point(e1, rf, cf, c, level),
                    edge_point(e2, rf, cf, c, level),
                ]);
            };
            match case {
                0 | 15 => {}
                1 | 14 => emit(3, 0),
                2 | 13 => emit(0, 1),
                4 | 11 => emit(1, 2),
                8 | 7 => emit(2, 3),
                3 | 12 => emit(3, 1),
                6 | 9 => emit(0, 2),
                5 => {
                    // c0 and c2 inside; center decides the diagonal.
                    let center = (c[0] + c[1] + c[2] + c[3]) / 4.0;
                    if center < level {
                        emit(0, 1);
                        emit(2, 3);
                    } else {
                        emit(3, 0);
                        emit(1, 2);
                    }
                }
                10 => {
                    let center = (c[0] + c[1] + c[2] + c[3]) / 4.0;
                    if center < level {
                        emit(3, 0);
                        emit(1, 2);
                    } else {
                        emit(0, 1);
                        emit(2, 3);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    segments
}

/// Evenly spaced iso values strictly inside `(f_min, f_max)`.
pub fn contour_levels(grid: &LandscapeGrid, levels: usize) -> Vec<f64> {
    let (lo, hi) = (grid.f_min(), grid.f_max());
    if hi - lo == 0.0 {
        return Vec::new();
    }
    (1..=levels)
        .map(|i| lo + (hi - lo) * i as f64 / (levels + 1) as f64)
        .collect()
}

/// Render a 2-D grid as filled heat cells with iso-lines at `levels` evenly
/// spaced values. Fails with a usage error on any other dimensionality.
pub fn render_contour(grid: &LandscapeGrid, levels: usize) -> Result<String> {
    if grid.ndim() != 2 {
        return Err(Error::usage(format!(
            "contour rendering needs a 2-dimensional grid, got {} axes",
            grid.ndim()
        )));
    }
    let shape = grid.shape();
    let (rows, cols) = (shape[0], shape[1]);
    let (width, height) = (640.0, 560.0);
    let (ml, mr, mt, mb) = (50.0, 20.0, 20.0, 40.0);
    let plot_w = width - ml - mr;
    let plot_h = height - mt - mb;
    let cell_w = plot_w / cols as f64;
    let cell_h = plot_h / rows as f64;
    let x_of = |c: f64| ml + c * cell_w + cell_w / 2.0;
    let y_of = |r: f64| mt + r * cell_h + cell_h / 2.0;

    let (lo, hi) = (grid.f_min(), grid.f_max());
    let span = hi - lo;
    let mut doc = SvgDoc::new(width, height);
    for r in 0..rows {
        for c in 0..cols {
            let v = grid.values()[r * cols + c];
            let t = if span == 0.0 { 0.5 } else { (v - lo) / span };
            doc.rect(
                ml + c as f64 * cell_w,
                mt + r as f64 * cell_h,
                cell_w,
                cell_h,
                &heat_color(t),
            );
        }
    }
    for level in contour_levels(grid, levels) {
        for seg in contour_segments(grid, level) {
            doc.line(x_of(seg[0].0), y_of(seg[0].1), x_of(seg[1].0), y_of(seg[1].1), "#ffffff", 1.0);
        }
    }
    // Axis labels: alpha ranges.
    let ax = grid.axes();
    doc.text(ml, mt + plot_h + 16.0, 11.0, "start", &fmt_num(ax[1][0]));
    doc.text(ml + plot_w, mt + plot_h + 16.0, 11.0, "end", &fmt_num(ax[1][cols - 1]));
    doc.text(ml - 6.0, mt + plot_h, 11.0, "end", &fmt_num(ax[0][rows - 1]));
    doc.text(ml - 6.0, mt + 10.0, 11.0, "end", &fmt_num(ax[0][0]));
    Ok(doc.finish())
}
