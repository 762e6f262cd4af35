//! Marching-squares level sets of a temporal generalization matrix.
//!
//! Grid point `(r, c)` holds `accuracy[r][c]`; a point is inside the level set
//! when its value is `>= threshold`. Crossings are placed by linear
//! interpolation along cell edges. Saddle cells are disambiguated by the
//! average of their four corners. Segments are chained into polylines through
//! shared edges: open polylines (ending on the grid boundary) come first,
//! then closed loops, whose last vertex repeats the first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tg::TGMatrix;
use crate::numerics::Matrix;
use crate::{Error, Result};

/// Polyline in fractional grid coordinates `(row, col)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPolyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

/// Polyline in train/test offset coordinates, milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub threshold: f64,
    /// `(train_ms, test_ms)` vertices.
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

/// Cell edge: horizontal edges join `(r, c)`–`(r, c+1)`, vertical ones `(r, c)`–`(r+1, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

fn crossing(grid: &Matrix, threshold: f64, edge: Edge) -> (f64, f64) {
    let (a, b) = match edge {
        Edge::H(r, c) => ((r, c), (r, c + 1)),
        Edge::V(r, c) => ((r, c), (r + 1, c)),
    };
    let (va, vb) = (grid.get(a.0, a.1), grid.get(b.0, b.1));
    let t = if vb == va { 0.5 } else { ((threshold - va) / (vb - va)).clamp(0.0, 1.0) };
    (
        a.0 as f64 + t * (b.0 as f64 - a.0 as f64),
        a.1 as f64 + t * (b.1 as f64 - a.1 as f64),
    )
}

fn cell_segments(grid: &Matrix, threshold: f64, r: usize, c: usize, out: &mut Vec<(Edge, Edge)>) {
    let inside = |rr: usize, cc: usize| grid.get(rr, cc) >= threshold;
    let case = (inside(r, c) as u8) << 3
        | (inside(r, c + 1) as u8) << 2
        | (inside(r + 1, c + 1) as u8) << 1
        | inside(r + 1, c) as u8;
    let top = Edge::H(r, c);
    let bottom = Edge::H(r + 1, c);
    let left = Edge::V(r, c);
    let right = Edge::V(r, c + 1);
    let center_inside = || {
        (grid.get(r, c) + grid.get(r, c + 1) + grid.get(r + 1, c + 1) + grid.get(r + 1, c)) / 4.0 >= threshold
    };
    match case {
        0 | 15 => {}
        1 | 14 => out.push((left, bottom)),
        2 | 13 => out.push((bottom, right)),
        3 | 12 => out.push((left, right)),
        4 | 11 => out.push((top, right)),
        6 | 9 => out.push((top, bottom)),
        7 | 8 => out.push((left, top)),
        5 => {
            if center_inside() {
                out.push((left, top));
                out.push((right, bottom));
            } else {
                out.push((top, right));
                out.push((bottom, left));
            }
        }
        10 => {
            if center_inside() {
                out.push((top, right));
                out.push((bottom, left));
            } else {
                out.push((left, top));
                out.push((right, bottom));
            }
        }
        _ => unreachable!("4-bit case"),
    }
}

/// Level-set polylines of `grid` at `threshold`, in grid coordinates.
pub fn marching_squares(grid: &Matrix, threshold: f64) -> Vec<GridPolyline> {
    if grid.rows() < 2 || grid.cols() < 2 {
        return Vec::new();
    }
    let mut segments = Vec::new();
    for r in 0..grid.rows() - 1 {
        for c in 0..grid.cols() - 1 {
            cell_segments(grid, threshold, r, c, &mut segments);
        }
    }

    let mut incident: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(i);
        incident.entry(b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];

    let walk = |start_edge: Edge, start_seg: usize, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut chain = vec![start_edge];
        let (mut edge, mut seg) = (start_edge, Some(start_seg));
        while let Some(s) = seg {
            used[s] = true;
            let (a, b) = segments[s];
            edge = if a == edge { b } else { a };
            chain.push(edge);
            seg = incident[&edge].iter().copied().find(|&t| !used[t]);
        }
        chain
    };

    let mut polylines = Vec::new();
    let ends: Vec<Edge> = incident.iter().filter(|(_, s)| s.len() == 1).map(|(e, _)| *e).collect();
    for e in ends {
        let s = incident[&e][0];
        if used[s] {
            continue;
        }
        let chain = walk(e, s, &mut used);
        polylines.push(GridPolyline {
            points: chain.iter().map(|&e| crossing(grid, threshold, e)).collect(),
            closed: false,
        });
    }
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        let chain = walk(segments[s].0, s, &mut used);
        polylines.push(GridPolyline {
            points: chain.iter().map(|&e| crossing(grid, threshold, e)).collect(),
            closed: true,
        });
    }
    polylines
}

/// Contour lines of a TG accuracy matrix, mapped to offset milliseconds.
pub fn extract_contours(matrix: &TGMatrix, threshold: f64) -> Result<Vec<Contour>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!("contour threshold must be in (0, 1), got {threshold}")));
    }
    let lo = matrix.offsets.first().copied().unwrap_or(0) as f64;
    let period = matrix.frame_period_ms;
    Ok(marching_squares(&matrix.accuracy, threshold)
        .into_iter()
        .map(|p| Contour {
            threshold,
            points: p
                .points
                .into_iter()
                .map(|(r, c)| ((lo + r) * period, (lo + c) * period))
                .collect(),
            closed: p.closed,
        })
        .collect())
}
