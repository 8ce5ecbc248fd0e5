//! Equipartition residual of `q ∘ h` and the large-scale slope of `h`.

use serde::Serialize;

use crate::eikonal::{rescaled_field, solve_signed_distance, DistanceField, StripGrid};
use crate::error::{Error, Result};
use crate::medium::{CoefficientField, DirectionFrame};
use crate::profile::{q, w};

/// `Σ |½|∇u|² − aW(u)| / Σ (½|∇u|² + aW(u))` for `u = q ∘ h`.
pub fn equipartition_residual(df: &DistanceField) -> f64 {
    equipartition_residual_with(df, q)
}

/// As [`equipartition_residual`] for `u = profile ∘ h`.
///
/// Gradients are central differences over interior nodes; window grids skip
/// their lateral wall nodes.
pub fn equipartition_residual_with<F: Fn(f64) -> f64>(df: &DistanceField, profile: F) -> f64 {
    let g = df.grid();
    let u: Vec<f64> = df.h().iter().map(|&h| profile(h)).collect();
    let row_len = g.row_len();
    let lat = g.lateral_nodes();
    let (mut defect, mut energy) = (0.0, 0.0);
    for r in 1..g.n_rows() - 1 {
        'node: for j in 0..row_len {
            let idx = r * row_len + j;
            let d = (u[idx + row_len] - u[idx - row_len]) / (2.0 * g.ds());
            let mut grad2 = d * d;
            let (mut stride, mut rem) = (1, j);
            for (k, &n) in lat.iter().enumerate() {
                let c = rem % n;
                rem /= n;
                let lo = if c > 0 {
                    idx - stride
                } else if g.is_periodic() {
                    idx + (n - 1) * stride
                } else {
                    continue 'node;
                };
                let hi = if c + 1 < n {
                    idx + stride
                } else if g.is_periodic() {
                    idx - (n - 1) * stride
                } else {
                    continue 'node;
                };
                let d = (u[hi] - u[lo]) / (2.0 * g.dt()[k]);
                grad2 += d * d;
                stride *= n;
            }
            let kinetic = 0.5 * grad2;
            let potential = df.a()[idx] * w(u[idx]);
            defect += (kinetic - potential).abs();
            energy += kinetic + potential;
        }
    }
    if energy == 0.0 {
        0.0
    } else {
        defect / energy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSlope {
    pub m: Vec<u32>,
    /// `c_m`: mean of `k_m(z)/(z·ν)` over `1/2 ≤ |z·ν| ≤ 1`.
    pub c: Vec<f64>,
    pub c_fit: f64,
    /// Relative spread of the last two `c_m`.
    pub spread: f64,
    /// Spread of the last two values within 5%.
    pub cauchy: bool,
    pub lower: f64,
    pub upper: f64,
    pub in_bounds: bool,
}

/// Slope `c(ν)` of `h_ν` at large scale from the rescalings `k_m = h(m·)/m`.
pub fn metric_slope_c(
    field: &CoefficientField,
    frame: &DirectionFrame,
    m_list: &[u32],
    delta: f64,
) -> Result<MetricSlope> {
    if m_list.is_empty() || m_list.contains(&0) || m_list.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidInput("m_list must be positive and strictly ascending".into()));
    }
    if !frame.is_rational() {
        return Err(Error::InvalidInput("metric slope needs a rational direction".into()));
    }
    let top = *m_list.last().unwrap() as f64;
    let grid = StripGrid::periodic(field, frame, delta, top, 1)?;
    let df = solve_signed_distance(field, &grid)?;
    let mut c = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let k = rescaled_field(&df, m)?;
        let g = k.grid();
        let row_len = g.row_len();
        let (mut sum, mut count) = (0.0, 0usize);
        for r in 0..g.n_rows() {
            let s = g.row_s(r);
            if s.abs() < 0.5 - 1e-12 || s.abs() > 1.0 + 1e-12 {
                continue;
            }
            for j in 0..row_len {
                sum += k.h()[r * row_len + j] / s;
                count += 1;
            }
        }
        c.push(sum / count as f64);
    }
    let c_fit = *c.last().unwrap();
    let spread = if c.len() >= 2 {
        let prev = c[c.len() - 2];
        (c_fit - prev).abs() / c_fit
    } else {
        0.0
    };
    let (lower, upper) = (field.theta_hat().sqrt(), field.big_theta_hat().sqrt());
    Ok(MetricSlope {
        m: m_list.to_vec(),
        in_bounds: (lower..=upper).contains(&c_fit),
        c,
        c_fit,
        cauchy: spread <= 0.05,
        spread,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOOTH: &str = "1 + 0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2";

    fn solve(expr: &str, p: &[i64], delta: f64) -> DistanceField {
        let field = CoefficientField::parse(expr, 2).unwrap();
        let frame = DirectionFrame::rational(p).unwrap();
        solve_signed_distance(&field, &StripGrid::periodic(&field, &frame, delta, 6.0, 1).unwrap()).unwrap()
    }

    #[test]
    fn exact_profile_has_small_residual() {
        assert!(equipartition_residual(&solve("1", &[1, 0], 1.0 / 64.0)) < 1e-3);
        assert!(equipartition_residual(&solve("1", &[1, 2], 1.0 / 64.0)) < 1e-3);
    }

    #[test]
    fn wrong_profile_is_order_one() {
        let df = solve("1", &[1, 0], 1.0 / 64.0);
        let r = equipartition_residual_with(&df, |h| q(2.0 * h));
        assert!(r > 0.2, "{r}");
    }

    #[test]
    fn residual_decreases_under_refinement() {
        let a = equipartition_residual(&solve(SMOOTH, &[1, 0], 1.0 / 32.0));
        let b = equipartition_residual(&solve(SMOOTH, &[1, 0], 1.0 / 64.0));
        assert!(b < a, "{a} -> {b}");
        let ratio = a / b;
        assert!((1.2..=2.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn slope_of_constant_media() {
        for (expr, c) in [("1", 1.0), ("4", 2.0)] {
            let field = CoefficientField::parse(expr, 2).unwrap();
            let frame = DirectionFrame::rational(&[1, 2]).unwrap();
            let s = metric_slope_c(&field, &frame, &[1, 2, 4], 1.0 / 16.0).unwrap();
            for v in &s.c {
                assert!((v - c).abs() < 1e-9);
            }
            assert!(s.cauchy);
        }
    }

    #[test]
    fn slope_in_metric_bounds() {
        let field = CoefficientField::parse(SMOOTH, 2).unwrap();
        let frame = DirectionFrame::rational(&[1, 0]).unwrap();
        let s = metric_slope_c(&field, &frame, &[1, 2, 4], 1.0 / 32.0).unwrap();
        assert!(s.in_bounds, "{s:?}");
        assert!(s.cauchy);
        assert!(metric_slope_c(&field, &frame, &[2, 1], 1.0 / 32.0).is_err());
    }
}
