//! Wulff shape `∩_ν {x·ν ≤ σ(ν)}` by polar duality.
//!
//! The half-plane `x·ν ≤ σ` is `x·d ≤ 1` with `d = ν/σ`, so the Wulff shape is
//! the polar of `conv{d_k}`: each hull edge `(d_i, d_j)` gives the vertex solving
//! `x·d_i = x·d_j = 1`.

use std::f64::consts::TAU;

use serde::Serialize;

use super::DirectionSweep;
use crate::error::{Error, Result};

const MIN_DIRECTIONS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WulffPolygon {
    /// Counter-clockwise vertices; the last is not repeated.
    pub vertices: Vec<[f64; 2]>,
    pub n_halfplanes: usize,
    /// Half-planes that contribute an edge.
    pub active: usize,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Wulff polygon of the interpolated `σ` sampled at `n_halfplanes` uniform angles.
pub fn wulff_shape_2d(sweep: &DirectionSweep, n_halfplanes: usize) -> Result<WulffPolygon> {
    if sweep.len() < MIN_DIRECTIONS || n_halfplanes < MIN_DIRECTIONS {
        return Err(Error::InvalidInput(format!(
            "Wulff shape needs at least {MIN_DIRECTIONS} directions (sweep has {}, requested {n_halfplanes})",
            sweep.len()
        )));
    }
    let spline = sweep.spline()?;
    let dual: Vec<[f64; 2]> = (0..n_halfplanes)
        .map(|k| {
            let t = TAU * k as f64 / n_halfplanes as f64;
            let s = spline.eval(t);
            [t.cos() / s, t.sin() / s]
        })
        .collect();
    let hull = convex_hull(dual);
    let m = hull.len();
    let vertices = (0..m)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % m]);
            let det = a[0] * b[1] - a[1] * b[0];
            [(b[1] - a[1]) / det, (a[0] - b[0]) / det]
        })
        .collect();
    Ok(WulffPolygon {
        vertices,
        n_halfplanes,
        active: m,
    })
}

impl WulffPolygon {
    /// Every turn is strictly counter-clockwise.
    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        n >= 3 && (0..n).all(|i| cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) > 0.0)
    }

    pub fn vertex_radii(&self) -> Vec<f64> {
        self.vertices.iter().map(|p| p[0].hypot(p[1])).collect()
    }

    /// Distance from the origin to the nearest edge line.
    pub fn inradius(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                cross(a, b, [0.0, 0.0]).abs() / (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .fold(f64::INFINITY, f64::min)
    }
}
