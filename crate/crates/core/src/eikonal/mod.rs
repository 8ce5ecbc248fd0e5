//! Signed geodesic distance to the plane `{x·ν = 0}` in the metric `√a`.
//!
//! `h_ν` solves `|∇h| = √a` with `h = 0` on the plane, positive on the
//! `x·ν > 0` side. Each half is a separate first-order Godunov problem solved
//! by fast sweeping on a [`StripGrid`]; a Dijkstra solve on the lattice graph
//! is provided as an independent upper oracle.

mod dijkstra;
mod grid;
mod sweep;

pub use dijkstra::{dijkstra_distance_oracle, Neighborhood, MAX_ORACLE_NODES};
pub use grid::StripGrid;

use crate::error::{Error, Result};
use crate::medium::{Bounds, CoefficientField};
use sweep::HalfProblem;

/// Hard cap on sweep iterations (each iteration runs all `2^N` orders).
pub const MAX_SWEEPS: usize = 1000;

/// Grid samples of `h_ν` together with the coefficient at the same nodes.
#[derive(Debug, Clone)]
pub struct DistanceField {
    grid: StripGrid,
    h: Vec<f64>,
    a: Vec<f64>,
    bounds: Bounds,
    residual: f64,
    sweeps: usize,
}

impl DistanceField {
    pub fn grid(&self) -> &StripGrid {
        &self.grid
    }

    /// `h` at every node, in grid storage order.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// `a` sampled at every node.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Largest Godunov fixed-point residual at convergence.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Sweep iterations used (sum over both halves).
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Mean of `|‖∇h‖ − √a|` by central differences over interior nodes at
    /// least `3δ` from the plane.
    pub fn gradient_defect_l1(&self) -> f64 {
        let g = &self.grid;
        let row_len = g.row_len();
        let n_rows = g.n_rows();
        let lat = g.lateral_nodes();
        let (mut sum, mut count) = (0.0, 0usize);
        for r in 1..n_rows - 1 {
            if g.row_s(r).abs() < 3.0 * g.delta() {
                continue;
            }
            'node: for j in 0..row_len {
                let idx = r * row_len + j;
                let ds = (self.h[idx + row_len] - self.h[idx - row_len]) / (2.0 * g.ds());
                let mut grad2 = ds * ds;
                let mut stride = 1;
                let mut rem = j;
                for (k, &n) in lat.iter().enumerate() {
                    let c = rem % n;
                    rem /= n;
                    let (lo, hi) = match (c, g.is_periodic()) {
                        (0, true) => (idx + (n - 1) * stride, idx + stride),
                        (c, true) if c + 1 == n => (idx - stride, idx - (n - 1) * stride),
                        (0, false) => continue 'node,
                        (c, false) if c + 1 == n => continue 'node,
                        _ => (idx - stride, idx + stride),
                    };
                    let d = (self.h[hi] - self.h[lo]) / (2.0 * g.dt()[k]);
                    grad2 += d * d;
                    stride *= n;
                }
                sum += (grad2.sqrt() - self.a[idx].sqrt()).abs();
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

fn half_slowness(grid: &StripGrid, root: &[f64], upward: bool) -> Vec<f64> {
    let row_len = grid.row_len();
    let n = grid.n_half();
    let mut out = Vec::with_capacity((n + 1) * row_len);
    for r in 0..=n {
        let src = if upward { n + r } else { n - r };
        out.extend_from_slice(&root[src * row_len..(src + 1) * row_len]);
    }
    out
}

/// Fast-sweeping solve of `|∇h| = √a`, `h = 0` on the plane, over `grid`.
///
/// The two halves are solved independently with the plane frozen; the lower
/// half is negated. Lateral boundaries wrap on periodic grids and are closed
/// by one-sided upwinding on windows.
pub fn solve_signed_distance(field: &CoefficientField, grid: &StripGrid) -> Result<DistanceField> {
    if field.dim() != grid.frame().dim() {
        return Err(Error::InvalidInput("field and grid dimensions differ".into()));
    }
    let a = grid.sample(field);
    let root: Vec<f64> = a.iter().map(|v| v.sqrt()).collect();
    let lat = grid.lateral_nodes();
    let lat_dims = lat.len();
    let problem_lat = [lat[0], if lat_dims == 2 { lat[1] } else { 1 }];
    let spacing = [
        grid.ds(),
        grid.dt()[0],
        if lat_dims == 2 { grid.dt()[1] } else { 1.0 },
    ];
    let tol = 1e-10 * field.big_theta_hat().sqrt() * grid.delta();
    let row_len = grid.row_len();
    let n = grid.n_half();
    let mut h = vec![0.0; grid.len()];
    let mut residual: f64 = 0.0;
    let mut sweeps = 0;
    for upward in [true, false] {
        let slowness = half_slowness(grid, &root, upward);
        let problem = HalfProblem {
            slowness: &slowness,
            rows: n + 1,
            lat: problem_lat,
            spacing,
            lat_dims,
            periodic: grid.is_periodic(),
        };
        let (u, iters) = problem.solve(tol, MAX_SWEEPS)?;
        residual = residual.max(problem.residual(&u));
        sweeps += iters;
        for r in 1..=n {
            let (dst, sign) = if upward { (n + r, 1.0) } else { (n - r, -1.0) };
            for j in 0..row_len {
                h[dst * row_len + j] = sign * u[r * row_len + j];
            }
        }
    }
    Ok(DistanceField {
        grid: grid.clone(),
        h,
        a,
        bounds: field.bounds(),
        residual,
        sweeps,
    })
}

/// Outcome of scanning `√θ̂ |s| ≤ sign(s) h ≤ √Θ̂ |s|` over every node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    /// Largest violation of the metric bounds divided by δ (0 if none).
    pub worst_violation: f64,
    /// Nodes violating the bounds by more than [`BoundsReport::slack`].
    pub violations: usize,
    /// `2 √Θ̂ δ`.
    pub slack: f64,
    pub nodes: usize,
}

pub fn check_distance_bounds(df: &DistanceField) -> BoundsReport {
    let g = &df.grid;
    let (lo, hi) = (df.bounds.theta.sqrt(), df.bounds.big_theta.sqrt());
    let slack = 2.0 * hi * g.delta();
    let row_len = g.row_len();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for (idx, &h) in df.h.iter().enumerate() {
        let s = g.row_s(idx / row_len);
        let (sa, ha) = (s.abs(), if s < 0.0 { -h } else { h });
        let v = (lo * sa - ha).max(ha - hi * sa).max(0.0);
        worst = worst.max(v);
        if v > slack {
            violations += 1;
        }
    }
    BoundsReport {
        worst_violation: worst / g.delta(),
        violations,
        slack,
        nodes: df.h.len(),
    }
}

/// `k_m(z) = h(m z) / m` on the strip `|z·ν| ≤ 1`.
///
/// Nodes of the rescaled field are the original nodes with coordinates
/// divided by `m`; `df` must reach height at least `m`.
pub fn rescaled_field(df: &DistanceField, m: u32) -> Result<DistanceField> {
    if m == 0 {
        return Err(Error::InvalidInput("scale m must be positive".into()));
    }
    let mf = m as f64;
    let g = &df.grid;
    if g.half_height() < mf * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!(
            "distance field reaches height {} but m = {m} needs {mf}",
            g.half_height()
        )));
    }
    let n_new = ((mf / g.ds()) * (1.0 + 1e-12)).floor() as usize;
    let n_new = n_new.min(g.n_half());
    let row_len = g.row_len();
    let first = g.n_half() - n_new;
    let range = first * row_len..(first + 2 * n_new + 1) * row_len;
    Ok(DistanceField {
        grid: g.rescaled(mf, n_new),
        h: df.h[range.clone()].iter().map(|v| v / mf).collect(),
        a: df.a[range].to_vec(),
        bounds: df.bounds,
        residual: df.residual / mf,
        sweeps: df.sweeps,
    })
}
