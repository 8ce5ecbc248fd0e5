//! Periodic cubic spline on the circle with nonuniform knots.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

/// Solves the cyclic tridiagonal system `b_i x_i + a_i x_{i−1} + c_i x_{i+1} = d_i`
/// (indices mod n) by Sherman–Morrison.
fn cyclic_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= a[0] * c[n - 1] / gamma;
    let x = thomas(a, &bb, c, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = thomas(a, &bb, c, &u);
    let fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

impl PeriodicSpline {
    /// Interpolates `values` at strictly increasing `knots` in `[0, 2π)`.
    pub fn new(knots: &[f64], values: &[f64]) -> Result<PeriodicSpline> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(Error::InvalidInput(format!("periodic spline needs ≥ 3 knots, got {n}")));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots[0] < 0.0 || knots[n - 1] >= TAU {
            return Err(Error::InvalidInput("spline knots must increase strictly within [0, 2π)".into()));
        }
        let h: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { knots[i + 1] - knots[i] } else { knots[0] + TAU - knots[n - 1] })
            .collect();
        let (mut a, mut b, mut c, mut d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            a[i] = h[prev];
            b[i] = 2.0 * (h[prev] + h[i]);
            c[i] = h[i];
            d[i] = 6.0 * ((values[next] - values[i]) / h[i] - (values[i] - values[prev]) / h[prev]);
        }
        let m = cyclic_tridiagonal(&a, &b, &c, &d);
        Ok(PeriodicSpline {
            knots: knots.to_vec(),
            values: values.to_vec(),
            m,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest gap between consecutive knots, wrapping around.
    pub fn max_gap(&self) -> f64 {
        let n = self.knots.len();
        let wrap = self.knots[0] + TAU - self.knots[n - 1];
        self.knots.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.knots.len();
        let t = theta.rem_euclid(TAU);
        // interval [k_i, k_{i+1}) containing t, wrapping below the first knot
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => n - 1,
            p => p - 1,
        };
        let j = (i + 1) % n;
        let (x0, x1) = if j == 0 {
            (self.knots[i], self.knots[0] + TAU)
        } else {
            (self.knots[i], self.knots[j])
        };
        let t = if t < x0 { t + TAU } else { t };
        let h = x1 - x0;
        let (u, v) = ((x1 - t) / h, (t - x0) / h);
        u * self.values[i]
            + v * self.values[j]
            + h * h / 6.0 * ((u * u * u - u) * self.m[i] + (v * v * v - v) * self.m[j])
    }
}
