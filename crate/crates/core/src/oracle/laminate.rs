//! Closed-form `σ(e₁)` for laminates `a = a(x₁)`.

use crate::error::{Error, Result};
use crate::medium::Expr;
use crate::profile::sech4_sqrt2;
use crate::quad::{adaptive_simpson, gauss_legendre};
use crate::sigma::tail_height;

/// Panel width for the outer quadrature.
const PANEL: f64 = 1.0 / 64.0;

/// `σ = 2 ∫ a(s) sech⁴(√2 h(s)) ds` with `h(s) = ∫₀^s √a`, for `a` depending
/// on `x₁` only (other coordinates are set to zero).
///
/// `h` is accumulated panel by panel with adaptive Simpson; the outer
/// integral uses 8-point Gauss–Legendre per panel over `|s| ≤ S`, with `S`
/// from the tail rule at tolerance `quad_tol`.
pub fn laminate_sigma_1d(a_1d: &Expr, quad_tol: f64) -> Result<f64> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidInput("quad_tol must be positive".into()));
    }
    let a = |s: f64| {
        let mut y = vec![0.0; a_1d.dim()];
        y[0] = s;
        a_1d.eval(&y)
    };
    let samples: Vec<f64> = (0..4096).map(|k| a(k as f64 / 4096.0)).collect();
    let theta = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(theta > 0.0 && samples.iter().all(|v| v.is_finite())) {
        return Err(Error::Hypothesis(format!("laminate coefficient must be positive, min {theta}")));
    }
    let s_max = tail_height(0.9 * theta, quad_tol);
    let panels = (s_max / PANEL).ceil() as usize;
    let (gx, gw) = gauss_legendre(8);
    let root = |s: f64| a(s).sqrt();
    let tol = quad_tol / panels as f64;
    let mut total = 0.0;
    for dir in [1.0, -1.0] {
        let mut h = 0.0;
        for p in 0..panels {
            let (s0, s1) = (dir * p as f64 * PANEL, dir * (p + 1) as f64 * PANEL);
            let c = 0.5 * (s0 + s1);
            for (xi, wi) in gx.iter().zip(&gw) {
                let s = c + 0.5 * (s1 - s0) * xi;
                let hs = h + adaptive_simpson(root, s0, s, tol);
                total += 0.5 * PANEL * wi * 2.0 * a(s) * sech4_sqrt2(hs);
            }
            h += adaptive_simpson(root, s0, s1, tol);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_laminates() {
        let mm = 4.0 * 2f64.sqrt() / 3.0;
        let one = Expr::parse("1", 1).unwrap();
        assert!((laminate_sigma_1d(&one, 1e-10).unwrap() - mm).abs() < 1e-9);
        let four = Expr::parse("4", 2).unwrap();
        assert!((laminate_sigma_1d(&four, 1e-10).unwrap() - 2.0 * mm).abs() < 1e-9);
    }

    #[test]
    fn periodic_laminate() {
        // tolerance-independent and between the bounds of the constant media
        let e = Expr::parse("1 + 0.5*sin(2*pi*x1)^2", 2).unwrap();
        let v = laminate_sigma_1d(&e, 1e-10).unwrap();
        let coarse = laminate_sigma_1d(&e, 1e-6).unwrap();
        assert!((v - coarse).abs() < 1e-5);
        let mm = 4.0 * 2f64.sqrt() / 3.0;
        assert!(v > mm && v < 1.5f64.sqrt() * mm);
    }

    #[test]
    fn rejects_non_positive() {
        let e = Expr::parse("sin(2*pi*x1)", 2).unwrap();
        assert!(laminate_sigma_1d(&e, 1e-8).is_err());
    }
}
