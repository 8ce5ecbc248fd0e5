//! Shortest paths on the lattice graph of a strip grid.
//!
//! Edge weights are Euclidean length times `√a` at the edge midpoint, so graph
//! distances overestimate the geodesic distance by the angular resolution of
//! the stencil.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{DistanceField, StripGrid};
use crate::error::{Error, Result};
use crate::medium::CoefficientField;

/// Node budget for the oracle (a 512 × 512 grid).
pub const MAX_ORACLE_NODES: usize = 512 * 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    /// Axis and diagonal moves.
    N8,
    /// Adds the knight moves `(±1, ±2)`, `(±2, ±1)`.
    N16,
}

impl Neighborhood {
    fn offsets(self) -> Vec<(i64, i64)> {
        let mut v = vec![
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        if self == Neighborhood::N16 {
            for (a, b) in [(1, 2), (2, 1)] {
                for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    v.push((sa * a, sb * b));
                }
            }
        }
        v
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, index breaks ties
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graph distance from the plane nodes, computed separately in each closed
/// half of the strip and negated below the plane. 2D only.
pub fn dijkstra_distance_oracle(
    field: &CoefficientField,
    grid: &StripGrid,
    neighborhood: Neighborhood,
) -> Result<DistanceField> {
    if grid.frame().dim() != 2 {
        return Err(Error::Unsupported("the graph oracle is 2D only".into()));
    }
    if grid.len() > MAX_ORACLE_NODES {
        return Err(Error::Guard(format!(
            "graph oracle limited to {MAX_ORACLE_NODES} nodes, grid has {}",
            grid.len()
        )));
    }
    let a = grid.sample(field);
    let n_lat = grid.row_len();
    let n = grid.n_half();
    let (ds, dt) = (grid.ds(), grid.dt()[0]);
    let offsets = neighborhood.offsets();
    let frame = grid.frame();
    let mut h = vec![0.0; grid.len()];

    for sign in [1i64, -1] {
        // half-local row index k ∈ [0, n] maps to storage row n + sign·k
        let mut dist = vec![f64::INFINITY; (n + 1) * n_lat];
        let mut heap = BinaryHeap::new();
        for (j, d) in dist.iter_mut().enumerate().take(n_lat) {
            *d = 0.0;
            heap.push(Entry(0.0, j));
        }
        let mut y = [0.0; 2];
        let mut x = [0.0; 2];
        while let Some(Entry(d, idx)) = heap.pop() {
            if d > dist[idx] {
                continue;
            }
            let (k, j) = ((idx / n_lat) as i64, (idx % n_lat) as i64);
            for &(dk, dj) in &offsets {
                let k2 = k + dk;
                if k2 < 0 || k2 > n as i64 {
                    continue;
                }
                let mut j2 = j + dj;
                if grid.is_periodic() {
                    j2 = j2.rem_euclid(n_lat as i64);
                } else if j2 < 0 || j2 >= n_lat as i64 {
                    continue;
                }
                // midpoint in local coordinates, unwrapped
                let r_mid = n as f64 + sign as f64 * (k as f64 + 0.5 * dk as f64);
                y[0] = (r_mid - n as f64) * ds;
                y[1] = grid.local(j as usize)[1] + 0.5 * dj as f64 * dt;
                frame.to_world_into(&y, &mut x);
                let len = ((dk as f64 * ds).powi(2) + (dj as f64 * dt).powi(2)).sqrt();
                let nd = d + len * field.eval(&x).sqrt();
                let nidx = k2 as usize * n_lat + j2 as usize;
                if nd < dist[nidx] {
                    dist[nidx] = nd;
                    heap.push(Entry(nd, nidx));
                }
            }
        }
        for k in 1..=n {
            let row = (n as i64 + sign * k as i64) as usize;
            for j in 0..n_lat {
                h[row * n_lat + j] = sign as f64 * dist[k * n_lat + j];
            }
        }
    }
    Ok(DistanceField {
        grid: grid.clone(),
        h,
        a,
        bounds: field.bounds(),
        residual: 0.0,
        sweeps: 0,
    })
}
