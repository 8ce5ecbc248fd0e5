//! The mollified step `ρ₁ ∗ sign(x·ν)` for the bump `ρ ∝ (1 − |x|²)⁴` on the unit ball.
//!
//! Along `s = x·ν` the step is `2 F(s) − 1`, where `F` is the CDF of the
//! bump's 1D marginal, with density proportional to `(1 − s²)^{4 + (N−1)/2}`.

use std::sync::OnceLock;

use crate::quad::adaptive_simpson;

const NODES: usize = 4096;

#[derive(Debug)]
pub(crate) struct Marginal {
    exponent: f64,
    norm: f64,
    cdf: Vec<f64>,
}

impl Marginal {
    fn new(dim: usize) -> Marginal {
        let exponent = 4.0 + (dim as f64 - 1.0) / 2.0;
        let density = |t: f64| (1.0 - t * t).max(0.0).powf(exponent);
        let h = 2.0 / NODES as f64;
        let mut cdf = Vec::with_capacity(NODES + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 0..NODES {
            let a = -1.0 + k as f64 * h;
            acc += adaptive_simpson(density, a, a + h, 1e-15);
            cdf.push(acc);
        }
        let norm = acc;
        cdf.iter_mut().for_each(|c| *c /= norm);
        Marginal { exponent, norm, cdf }
    }

    fn density(&self, t: f64) -> f64 {
        (1.0 - t * t).max(0.0).powf(self.exponent) / self.norm
    }

    /// CDF by cubic Hermite interpolation with the exact density as slope.
    pub(crate) fn cdf(&self, t: f64) -> f64 {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let h = 2.0 / NODES as f64;
        let x = (t + 1.0) / h;
        let k = (x.floor() as usize).min(NODES - 1);
        let u = x - k as f64;
        let t0 = -1.0 + k as f64 * h;
        let (f0, f1) = (self.cdf[k], self.cdf[k + 1]);
        let (d0, d1) = (self.density(t0) * h, self.density(t0 + h) * h);
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * f0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * f1
            + (u3 - u2) * d1
    }
}

pub(crate) fn marginal(dim: usize) -> &'static Marginal {
    static TWO: OnceLock<Marginal> = OnceLock::new();
    static THREE: OnceLock<Marginal> = OnceLock::new();
    match dim {
        2 => TWO.get_or_init(|| Marginal::new(2)),
        _ => THREE.get_or_init(|| Marginal::new(3)),
    }
}

/// Step profile in `s = x·ν` for a mollifier of radius `rho_scale`.
pub fn mollified_step_profile(s: f64, dim: usize, rho_scale: f64) -> f64 {
    2.0 * marginal(dim).cdf(s / rho_scale) - 1.0
}

/// `ρ_{rho_scale} ∗ u_{0,ν}` at `x`: −1 for `x·ν ≤ −ρ`, +1 for `x·ν ≥ ρ`.
pub fn mollified_step(x: &[f64], nu: &[f64], rho_scale: f64) -> f64 {
    let s: f64 = x.iter().zip(nu).map(|(a, b)| a * b).sum();
    mollified_step_profile(s, x.len(), rho_scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturation_and_center() {
        let nu = [0.6, 0.8];
        assert_eq!(mollified_step(&[1.2, 1.6], &nu, 1.0), 1.0);
        assert_eq!(mollified_step(&[-1.2, -1.6], &nu, 1.0), -1.0);
        assert!(mollified_step(&[0.8, -0.6], &nu, 1.0).abs() < 1e-14);
    }

    #[test]
    fn monotone_and_odd() {
        let mut prev = -1.0;
        for k in 0..1000 {
            let s = -1.5 + 3.0 * k as f64 / 999.0;
            let v = mollified_step_profile(s, 2, 1.0);
            assert!(v >= prev);
            assert!((v + mollified_step_profile(-s, 2, 1.0)).abs() < 1e-12);
            prev = v;
        }
    }

    #[test]
    fn cdf_matches_direct_quadrature() {
        // density ∝ (1 − t²)^{4.5} in 2D
        let m = marginal(2);
        let z = adaptive_simpson(|t| (1.0 - t * t).powf(4.5), -1.0, 1.0, 1e-14);
        for t in [-0.7, -0.1, 0.3, 0.95] {
            let direct = adaptive_simpson(|x| (1.0 - x * x).powf(4.5), -1.0, t, 1e-14) / z;
            assert!((m.cdf(t) - direct).abs() < 1e-12, "t = {t}");
        }
        // 3D marginal exponent 5: closed form normalization 2·(2^10 (5!)²/11!)
        let z3: f64 = 2.0 * 1024.0 * 14400.0 / 39_916_800.0;
        let m3 = marginal(3);
        assert!((m3.norm - z3).abs() < 1e-12);
    }
}
