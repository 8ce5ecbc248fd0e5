//! Direct minimization of the cell energy and closed-form special cases.
//!
//! The cube `T Q_ν` is discretized in the rotated frame with the boundary
//! trace fixed on all faces. The discrete energy
//! `E(u) = Σ w a W(u) + Σ_edges ½ k |Δu|²` (trapezoid weights, forward
//! differences) is minimized by Polak–Ribière conjugate gradients.

mod laminate;
mod mollifier;
mod ncg;

pub use laminate::laminate_sigma_1d;
pub use mollifier::{mollified_step, mollified_step_profile};
pub use ncg::{minimize_cell_energy, OptimizerOptions, OracleResult, Start};

use serde::Serialize;

use crate::eikonal::{solve_signed_distance, StripGrid};
use crate::error::{Error, Result};
use crate::medium::{CoefficientField, DirectionFrame};
use crate::profile::{q, w, ProfileParams, QtTable};

/// Node budget of a cell problem.
pub const MAX_CELL_NODES: usize = 1024 * 1024;

/// Admissible boundary traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// `ρ₁ ∗ sign(x·ν)`.
    MollifiedStep,
    /// `q_T ∘ h_ν`.
    ProfileTrace,
}

/// The discretized cell `T Q_ν`.
#[derive(Debug, Clone)]
pub struct CellProblem {
    grid: StripGrid,
    t: f64,
    bc: BoundaryCondition,
    a: Vec<f64>,
    h: Vec<f64>,
    fixed: Vec<bool>,
    /// Boundary trace on fixed nodes, zero elsewhere.
    trace: Vec<f64>,
    node_weight: Vec<f64>,
    /// `½ k` for edges along `s`, indexed by lateral node.
    k_s: Vec<f64>,
    /// `½ k` for lateral edges, indexed by row.
    k_t: Vec<f64>,
}

impl CellProblem {
    /// Cube of side `t` with spacing `delta` (2D).
    pub fn new(
        field: &CoefficientField,
        frame: &DirectionFrame,
        t: f64,
        delta: f64,
        bc: BoundaryCondition,
    ) -> Result<CellProblem> {
        if frame.dim() != 2 || field.dim() != 2 {
            return Err(Error::Unsupported("the cell oracle is 2D only".into()));
        }
        if !(t > 4.0 * delta) {
            return Err(Error::InvalidInput(format!("cube side {t} too small for delta {delta}")));
        }
        let grid = StripGrid::window(field, frame, delta, t / 2.0, t)?;
        if grid.len() > MAX_CELL_NODES {
            return Err(Error::Guard(format!(
                "cell problem limited to {MAX_CELL_NODES} nodes, cube has {}",
                grid.len()
            )));
        }
        let h = cube_distance(field, frame, &grid)?;
        let a = grid.sample(field);
        let (n_rows, n_lat) = (grid.n_rows(), grid.row_len());
        let (ds, dt) = (grid.ds(), grid.dt()[0]);
        let end = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };

        let mut fixed = vec![false; grid.len()];
        let mut trace = vec![0.0; grid.len()];
        let table = match bc {
            BoundaryCondition::ProfileTrace => Some(QtTable::new(ProfileParams::new(t, field.big_theta_hat())?)),
            BoundaryCondition::MollifiedStep => None,
        };
        let mut node_weight = vec![0.0; grid.len()];
        for r in 0..n_rows {
            for j in 0..n_lat {
                let idx = r * n_lat + j;
                node_weight[idx] = ds * dt * end(r, n_rows) * end(j, n_lat);
                if r == 0 || r + 1 == n_rows || j == 0 || j + 1 == n_lat {
                    fixed[idx] = true;
                    trace[idx] = match &table {
                        Some(tab) => tab.eval(h[idx]),
                        None => mollified_step_profile(grid.row_s(r), 2, 1.0),
                    };
                }
            }
        }
        let k_s = (0..n_lat).map(|j| 0.5 * end(j, n_lat) * dt / ds).collect();
        let k_t = (0..n_rows).map(|r| 0.5 * end(r, n_rows) * ds / dt).collect();
        Ok(CellProblem {
            grid,
            t,
            bc,
            a,
            h,
            fixed,
            trace,
            node_weight,
            k_s,
            k_t,
        })
    }

    pub fn grid(&self) -> &StripGrid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// Geodesic distance `h_ν` at the cube nodes.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Lateral measure `T^{N−1}` used for normalization.
    pub fn lateral_measure(&self) -> f64 {
        self.grid.lateral_measure()
    }

    /// Initial state: the trace on fixed nodes, `interior(s, h)` elsewhere.
    pub fn initial_state<F: Fn(f64, f64) -> f64>(&self, interior: F) -> Vec<f64> {
        let row_len = self.grid.row_len();
        (0..self.len())
            .map(|idx| {
                if self.fixed[idx] {
                    self.trace[idx]
                } else {
                    interior(self.grid.row_s(idx / row_len), self.h[idx])
                }
            })
            .collect()
    }

    /// Discrete energy and its gradient (zero on fixed nodes).
    pub fn energy_and_gradient(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let (n_rows, n_lat) = (self.grid.n_rows(), self.grid.row_len());
        let mut e = 0.0;
        for idx in 0..u.len() {
            let wa = self.node_weight[idx] * self.a[idx];
            let v = u[idx];
            let m = 1.0 - v * v;
            e += wa * m * m;
            grad[idx] = wa * (-4.0 * v * m);
        }
        for r in 0..n_rows {
            let base = r * n_lat;
            for j in 0..n_lat {
                let idx = base + j;
                if r + 1 < n_rows {
                    let k = self.k_s[j];
                    let d = u[idx + n_lat] - u[idx];
                    e += k * d * d;
                    grad[idx] -= 2.0 * k * d;
                    grad[idx + n_lat] += 2.0 * k * d;
                }
                if j + 1 < n_lat {
                    let k = self.k_t[r];
                    let d = u[idx + 1] - u[idx];
                    e += k * d * d;
                    grad[idx] -= 2.0 * k * d;
                    grad[idx + 1] += 2.0 * k * d;
                }
            }
        }
        for (g, &f) in grad.iter_mut().zip(&self.fixed) {
            if f {
                *g = 0.0;
            }
        }
        e
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let mut g = vec![0.0; u.len()];
        self.energy_and_gradient(u, &mut g)
    }

    /// Coefficients `[e₀, e₁, e₂, e₃, e₄]` of `E(u + α d)` as a polynomial in `α`.
    pub fn line_polynomial(&self, u: &[f64], d: &[f64]) -> [f64; 5] {
        let (n_rows, n_lat) = (self.grid.n_rows(), self.grid.row_len());
        let mut c = [0.0; 5];
        for idx in 0..u.len() {
            let wa = self.node_weight[idx] * self.a[idx];
            let (v, dv) = (u[idx], d[idx]);
            // 1 − (v + α dv)² = A + Bα + Cα²
            let (a, b, cc) = (1.0 - v * v, -2.0 * v * dv, -dv * dv);
            c[0] += wa * a * a;
            c[1] += wa * 2.0 * a * b;
            c[2] += wa * (b * b + 2.0 * a * cc);
            c[3] += wa * 2.0 * b * cc;
            c[4] += wa * cc * cc;
        }
        for r in 0..n_rows {
            let base = r * n_lat;
            for j in 0..n_lat {
                let idx = base + j;
                if r + 1 < n_rows {
                    let k = self.k_s[j];
                    let (du, dd) = (u[idx + n_lat] - u[idx], d[idx + n_lat] - d[idx]);
                    c[0] += k * du * du;
                    c[1] += 2.0 * k * du * dd;
                    c[2] += k * dd * dd;
                }
                if j + 1 < n_lat {
                    let k = self.k_t[r];
                    let (du, dd) = (u[idx + 1] - u[idx], d[idx + 1] - d[idx]);
                    c[0] += k * du * du;
                    c[1] += 2.0 * k * du * dd;
                    c[2] += k * dd * dd;
                }
            }
        }
        c
    }

    /// Largest `|u − sign(s)|` over nodes with `|s| ≥ s_min`.
    pub fn plane_deviation(&self, u: &[f64], s_min: f64) -> f64 {
        let row_len = self.grid.row_len();
        u.iter()
            .enumerate()
            .filter_map(|(idx, &v)| {
                let s = self.grid.row_s(idx / row_len);
                (s.abs() >= s_min).then(|| (v - s.signum()).abs())
            })
            .fold(0.0, f64::max)
    }

    /// `Σ |½|∇u|² − aW(u)| / Σ (½|∇u|² + aW(u))` with central differences on interior nodes.
    pub fn equipartition(&self, u: &[f64]) -> f64 {
        let (n_rows, n_lat) = (self.grid.n_rows(), self.grid.row_len());
        let (ds, dt) = (self.grid.ds(), self.grid.dt()[0]);
        let (mut defect, mut total) = (0.0, 0.0);
        for r in 1..n_rows - 1 {
            for j in 1..n_lat - 1 {
                let idx = r * n_lat + j;
                let gs = (u[idx + n_lat] - u[idx - n_lat]) / (2.0 * ds);
                let gt = (u[idx + 1] - u[idx - 1]) / (2.0 * dt);
                let kin = 0.5 * (gs * gs + gt * gt);
                let pot = self.a[idx] * w(u[idx]);
                defect += (kin - pot).abs();
                total += kin + pot;
            }
        }
        defect / total
    }

    /// `q ∘ h` at the nodes (trace on the boundary).
    pub fn geodesic_state(&self) -> Vec<f64> {
        self.initial_state(|_, h| q(h))
    }
}

/// `h_ν` on the cube nodes: from a periodic strip for rational directions
/// (linear interpolation in `t`), from a window solve otherwise.
fn cube_distance(field: &CoefficientField, frame: &DirectionFrame, cube: &StripGrid) -> Result<Vec<f64>> {
    if !frame.is_rational() || field.uniform_period().is_none() {
        return Ok(solve_signed_distance(field, cube)?.h().to_vec());
    }
    let strip = StripGrid::periodic(field, frame, cube.delta(), cube.half_height(), 1)?;
    debug_assert_eq!(strip.n_half(), cube.n_half());
    let df = solve_signed_distance(field, &strip)?;
    let (n_s, dt_s) = (strip.row_len(), strip.dt()[0]);
    let period = n_s as f64 * dt_s;
    let n_c = cube.row_len();
    let mut h = vec![0.0; cube.len()];
    for (idx, v) in h.iter_mut().enumerate() {
        let (r, j) = (idx / n_c, idx % n_c);
        let t = cube.local(j)[1].rem_euclid(period) / dt_s;
        let k = (t.floor() as usize).min(n_s - 1);
        let lam = t - k as f64;
        let (h0, h1) = (df.h()[r * n_s + k], df.h()[r * n_s + (k + 1) % n_s]);
        *v = (1.0 - lam) * h0 + lam * h1;
    }
    Ok(h)
}
