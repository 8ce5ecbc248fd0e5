//! Godunov fast sweeping for `|∇u| = f` on a half strip with `u = 0` on row 0.

use crate::error::{Error, Result};

/// Half-strip eikonal problem. Row 0 is the plane and stays frozen at zero;
/// the last row is closed by one-sided upwinding.
pub(crate) struct HalfProblem<'a> {
    pub slowness: &'a [f64],
    pub rows: usize,
    /// Lateral node counts `[n₁, n₂]`; `n₂ = 1` in 2D.
    pub lat: [usize; 2],
    /// `[ds, dt₁, dt₂]`.
    pub spacing: [f64; 3],
    pub lat_dims: usize,
    pub periodic: bool,
}

/// Solution of the discrete Godunov equation `Σ_k ((u − a_k)⁺ / h_k)² = f²`.
///
/// Axes are activated in increasing order of `a_k`; the discriminant is
/// clamped at zero and a single active axis reduces to the 1D upwind value.
#[inline]
pub(crate) fn godunov(mut a: [f64; 3], mut h: [f64; 3], n: usize, f: f64) -> f64 {
    // insertion sort, n ≤ 3
    for i in 1..n {
        let mut j = i;
        while j > 0 && a[j - 1] > a[j] {
            a.swap(j - 1, j);
            h.swap(j - 1, j);
            j -= 1;
        }
    }
    if !a[0].is_finite() {
        return f64::INFINITY;
    }
    let mut u = a[0] + f * h[0];
    let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
    for k in 0..n {
        if k > 0 {
            if u <= a[k] {
                break;
            }
            let w = 1.0 / (h[0] * h[0]);
            if k == 1 {
                sa = w;
                sb = a[0] * w;
                sc = a[0] * a[0] * w;
            }
            let wk = 1.0 / (h[k] * h[k]);
            sa += wk;
            sb += a[k] * wk;
            sc += a[k] * a[k] * wk;
            let disc = (sb * sb - sa * (sc - f * f)).max(0.0);
            u = (sb + disc.sqrt()) / sa;
        }
    }
    u
}

impl HalfProblem<'_> {
    #[inline]
    fn row_len(&self) -> usize {
        self.lat[0] * self.lat[1]
    }

    /// Upwind neighbour minima and spacings at `(r, j1, j2)`.
    #[inline]
    fn stencil(&self, u: &[f64], r: usize, j1: usize, j2: usize) -> ([f64; 3], usize) {
        let row_len = self.row_len();
        let idx = r * row_len + j2 * self.lat[0] + j1;
        let mut a = [f64::INFINITY; 3];
        a[0] = u[idx - row_len];
        if r + 1 < self.rows {
            a[0] = a[0].min(u[idx + row_len]);
        }
        a[1] = self.lateral_min(u, idx, j1, self.lat[0], 1);
        if self.lat_dims == 2 {
            a[2] = self.lateral_min(u, idx, j2, self.lat[1], self.lat[0]);
        }
        (a, 1 + self.lat_dims)
    }

    #[inline]
    fn lateral_min(&self, u: &[f64], idx: usize, j: usize, n: usize, stride: usize) -> f64 {
        if n == 1 {
            return f64::INFINITY;
        }
        let lo = if j > 0 {
            u[idx - stride]
        } else if self.periodic {
            u[idx + (n - 1) * stride]
        } else {
            f64::INFINITY
        };
        let hi = if j + 1 < n {
            u[idx + stride]
        } else if self.periodic {
            u[idx - (n - 1) * stride]
        } else {
            f64::INFINITY
        };
        lo.min(hi)
    }

    /// Runs sweeps until the largest nodal update drops below `tol`.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
        let row_len = self.row_len();
        let mut u = vec![f64::INFINITY; self.rows * row_len];
        u[..row_len].iter_mut().for_each(|v| *v = 0.0);
        if self.rows == 1 {
            return Ok((u, 0));
        }
        let orders2 = if self.lat_dims == 2 { 2 } else { 1 };
        let mut last_change = f64::INFINITY;
        for iter in 1..=max_iter {
            let mut change: f64 = 0.0;
            for order in 0..(4 * orders2) {
                let (down0, down1, down2) = (order & 1 == 1, order & 2 == 2, order & 4 == 4);
                for ri in 1..self.rows {
                    let r = if down0 { self.rows - ri } else { ri };
                    for k2 in 0..self.lat[1] {
                        let j2 = if down2 { self.lat[1] - 1 - k2 } else { k2 };
                        for k1 in 0..self.lat[0] {
                            let j1 = if down1 { self.lat[0] - 1 - k1 } else { k1 };
                            let idx = r * row_len + j2 * self.lat[0] + j1;
                            let (a, n) = self.stencil(&u, r, j1, j2);
                            let cand = godunov(a, self.spacing, n, self.slowness[idx]);
                            let old = u[idx];
                            if cand < old {
                                change = change.max(if old.is_finite() { old - cand } else { f64::INFINITY });
                                u[idx] = cand;
                            }
                        }
                    }
                }
            }
            last_change = change;
            if change < tol {
                return Ok((u, iter));
            }
        }
        Err(Error::NonConvergence {
            what: "fast sweeping".into(),
            iterations: max_iter,
            residual: last_change,
        })
    }

    /// Largest `|G(u) − u|` over the free nodes.
    pub fn residual(&self, u: &[f64]) -> f64 {
        let row_len = self.row_len();
        let mut worst: f64 = 0.0;
        for r in 1..self.rows {
            for j2 in 0..self.lat[1] {
                for j1 in 0..self.lat[0] {
                    let idx = r * row_len + j2 * self.lat[0] + j1;
                    let (a, n) = self.stencil(u, r, j1, j2);
                    let g = godunov(a, self.spacing, n, self.slowness[idx]);
                    worst = worst.max((g - u[idx]).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn godunov_one_dimensional() {
        let h = [0.1, 0.1, 0.1];
        assert_eq!(godunov([1.0, f64::INFINITY, f64::INFINITY], h, 3, 2.0), 1.2);
        // second axis too large to activate
        assert_eq!(godunov([1.0, 5.0, f64::INFINITY], h, 2, 2.0), 1.2);
        assert_eq!(godunov([5.0, 1.0, f64::INFINITY], h, 2, 2.0), 1.2);
    }

    #[test]
    fn godunov_two_dimensional() {
        // equal neighbours: u = a + f h / √2
        let u = godunov([1.0, 1.0, 0.0], [0.1, 0.1, 1.0], 2, 1.0);
        assert!((u - (1.0 + 0.1 / 2f64.sqrt())).abs() < 1e-15);
        // residual of the quadratic vanishes
        let (a, b, h, k, f) = (1.0, 1.03, 0.1, 0.05, 1.3);
        let u = godunov([a, b, 0.0], [h, k, 1.0], 2, f);
        let r = ((u - a) / h).powi(2) + ((u - b) / k).powi(2) - f * f;
        assert!(r.abs() < 1e-12);
        assert!(u >= b);
    }

    #[test]
    fn godunov_three_dimensional() {
        let u = godunov([2.0, 2.0, 2.0], [0.5, 0.5, 0.5], 3, 1.0);
        assert!((u - (2.0 + 0.5 / 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn uniform_slowness_gives_linear_solution() {
        let rows = 21;
        let lat = 8;
        let slowness = vec![2.0; rows * lat];
        let p = HalfProblem {
            slowness: &slowness,
            rows,
            lat: [lat, 1],
            spacing: [0.05, 0.07, 1.0],
            lat_dims: 1,
            periodic: true,
        };
        let (u, iters) = p.solve(1e-12, 100).unwrap();
        assert!(iters <= 3);
        for r in 0..rows {
            for j in 0..lat {
                assert!((u[r * lat + j] - 2.0 * 0.05 * r as f64).abs() < 1e-13);
            }
        }
        assert!(p.residual(&u) < 1e-13);
    }
}
