//! The periodic coefficient `a(x)` and direction frames.

mod expr;
mod frame;

pub use expr::{BinOp, Expr, Func, Node};
pub use frame::{direction_frame, DirectionFrame, DirectionInput};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};

/// Default sampling density used when a field is validated.
pub const DEFAULT_BOUND_SAMPLES: usize = 64;

/// Estimated bounds `θ̂ ≤ a ≤ Θ̂` together with the safety margin folded into them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub theta: f64,
    pub big_theta: f64,
    pub margin: f64,
}

/// A validated periodic coefficient field.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    expr: Expr,
    period: Vec<f64>,
    bounds: Bounds,
}

pub fn parse_coefficient_expr(text: &str, dim: usize) -> Result<Expr> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
    }
    Expr::parse(text, dim)
}

impl CoefficientField {
    /// Parses and validates a field with unit period.
    pub fn parse(text: &str, dim: usize) -> Result<CoefficientField> {
        CoefficientField::new(parse_coefficient_expr(text, dim)?, None)
    }

    pub fn new(expr: Expr, period: Option<Vec<f64>>) -> Result<CoefficientField> {
        let dim = expr.dim();
        let period = period.unwrap_or_else(|| vec![1.0; dim]);
        if period.len() != dim || period.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "period must list {dim} positive lengths"
            )));
        }
        let mut field = CoefficientField {
            expr,
            period,
            bounds: Bounds {
                theta: 0.0,
                big_theta: 0.0,
                margin: 0.0,
            },
        };
        let samples = if dim == 2 { DEFAULT_BOUND_SAMPLES } else { 32 };
        field.bounds = field.sample_bounds(samples)?;
        field.check_periodicity()?;
        Ok(field)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.expr.dim()
    }

    pub fn period(&self) -> &[f64] {
        &self.period
    }

    /// The common period when all axes share one.
    pub fn uniform_period(&self) -> Option<f64> {
        let p = self.period[0];
        self.period.iter().all(|&q| q == p).then_some(p)
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn theta_hat(&self) -> f64 {
        self.bounds.theta
    }

    pub fn big_theta_hat(&self) -> f64 {
        self.bounds.big_theta
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.expr.eval(x)
    }

    /// The field `λ² a`, with bounds scaled accordingly.
    pub fn scaled(&self, lambda_sq: f64) -> Result<CoefficientField> {
        let text = format!("({lambda_sq:e})*({})", self.expr.source());
        CoefficientField::new(Expr::parse(&text, self.dim())?, Some(self.period.clone()))
    }

    /// Min/max of `a` on a uniform grid over one period cell, widened by a
    /// grid Lipschitz estimate times the spacing.
    pub fn estimate_bounds(&self, samples_per_axis: usize) -> Result<Bounds> {
        if samples_per_axis < 64 {
            return Err(Error::InvalidInput(format!(
                "samples_per_axis must be at least 64, got {samples_per_axis}"
            )));
        }
        self.sample_bounds(samples_per_axis)
    }

    fn sample_bounds(&self, n: usize) -> Result<Bounds> {
        let dim = self.dim();
        let total = n.pow(dim as u32);
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; dim];
        for k in 0..total {
            let mut r = k;
            for (axis, xc) in x.iter_mut().enumerate() {
                *xc = (r % n) as f64 * self.period[axis] / n as f64;
                r /= n;
            }
            let v = self.eval(&x);
            if !v.is_finite() {
                return Err(Error::Hypothesis(format!(
                    "a is not finite at {x:?} (value {v})"
                )));
            }
            values.push(v);
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if min <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "a must be positive, sampled minimum is {min}"
            )));
        }
        // Lipschitz estimate times spacing is the largest periodic neighbour jump.
        let mut margin: f64 = 0.0;
        let mut stride = 1;
        for _ in 0..dim {
            for k in 0..total {
                let c = (k / stride) % n;
                let nb = if c + 1 == n { k + stride - n * stride } else { k + stride };
                margin = margin.max((values[nb] - values[k]).abs());
            }
            stride *= n;
        }
        let theta = min - margin;
        if theta <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "lower bound of a cannot be certified positive (min {min}, margin {margin})"
            )));
        }
        Ok(Bounds {
            theta,
            big_theta: max + margin,
            margin,
        })
    }

    fn check_periodicity(&self) -> Result<()> {
        let dim = self.dim();
        let mut rng = StdRng::seed_from_u64(0x5eed_a11);
        let mut x = vec![0.0; dim];
        for _ in 0..100 {
            for (axis, xc) in x.iter_mut().enumerate() {
                *xc = rng.gen_range(-3.0..3.0) * self.period[axis];
            }
            let base = self.eval(&x);
            for axis in 0..dim {
                let mut y = x.clone();
                y[axis] += self.period[axis];
                let shifted = self.eval(&y);
                if (shifted - base).abs() > 1e-12 * base.abs().max(1.0) {
                    return Err(Error::Hypothesis(format!(
                        "a is not periodic along x{} with period {}: a({x:?}) = {base}, shifted {shifted}",
                        axis + 1,
                        self.period[axis]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOOTH: &str = "1 + 0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2";
    const LAMINATE: &str = "1 + 0.5*sin(2*pi*x1)^2";

    #[test]
    fn constant_field() {
        let f = CoefficientField::parse("1", 2).unwrap();
        assert_eq!(f.eval(&[0.3, -7.0]), 1.0);
        let b = f.estimate_bounds(64).unwrap();
        assert_eq!((b.theta, b.big_theta), (1.0, 1.0));
    }

    #[test]
    fn laminate_value_and_bounds() {
        let f = CoefficientField::parse(LAMINATE, 2).unwrap();
        assert!((f.eval(&[0.25, 0.7]) - 1.5).abs() < 1e-15);
        let b = f.estimate_bounds(64).unwrap();
        assert!(b.theta <= 1.0 && b.theta >= 1.0 - b.margin - 1e-15);
        assert!(b.big_theta >= 1.5 && b.big_theta <= 1.5 + b.margin + 1e-15);
        assert!(b.margin < 0.06);
    }

    #[test]
    fn negative_field_rejected() {
        assert!(matches!(
            CoefficientField::parse("sin(2*pi*x1)", 2),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            CoefficientField::parse("1/(x1 - x1)", 2),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn non_periodic_rejected() {
        assert!(matches!(
            CoefficientField::parse("1 + 0.1*sin(x1)^2", 2),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn small_sample_count_rejected() {
        let f = CoefficientField::parse("1", 2).unwrap();
        assert!(f.estimate_bounds(16).is_err());
    }

    #[test]
    fn periodicity_on_random_points() {
        let f = CoefficientField::parse(SMOOTH, 2).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let a = f.eval(&x);
            assert!((f.eval(&[x[0] + 1.0, x[1]]) - a).abs() <= 1e-12 * a);
            assert!((f.eval(&[x[0], x[1] + 1.0]) - a).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn bounds_hold_on_random_points() {
        let f = CoefficientField::parse(SMOOTH, 2).unwrap();
        let b = f.estimate_bounds(64).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10_000 {
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let a = f.eval(&x);
            assert!(a >= b.theta - b.margin && a <= b.big_theta + b.margin);
        }
    }

    #[test]
    fn lateral_translation_invariance() {
        let f = CoefficientField::parse(SMOOTH, 2).unwrap();
        let frame = DirectionFrame::rational(&[1, 2]).unwrap();
        let tau = frame.lateral_unit(0).to_vec();
        let l = frame.lateral_period().unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let y = [x[0] + l * tau[0], x[1] + l * tau[1]];
            assert!((f.eval(&x) - f.eval(&y)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_unit_period() {
        let e = Expr::parse("2 + cos(pi*x1)", 2).unwrap();
        let f = CoefficientField::new(e, Some(vec![2.0, 2.0])).unwrap();
        assert_eq!(f.uniform_period(), Some(2.0));
        let e = Expr::parse("2 + cos(pi*x1)", 2).unwrap();
        assert!(CoefficientField::new(e, None).is_err());
    }

    #[test]
    fn scaling() {
        let f = CoefficientField::parse(SMOOTH, 2).unwrap();
        let g = f.scaled(4.0).unwrap();
        assert!((g.eval(&[0.1, 0.3]) - 4.0 * f.eval(&[0.1, 0.3])).abs() < 1e-14);
        assert!((g.theta_hat() - 4.0 * f.theta_hat()).abs() < 1e-12);
    }
}
