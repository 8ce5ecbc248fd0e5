//! Angular derivatives of `σ`, the tangential Hessian gap and the `σ′` probe.

use std::f64::consts::TAU;

use serde::Serialize;

use super::{DirectionSweep, PeriodicSpline};
use crate::error::Result;
use crate::profile::sigma0;

/// Relative budget above which second derivatives are not attempted.
pub const INCONCLUSIVE_BUDGET: f64 = 1e-2;

const MIN_STEP_DEG: f64 = 2.0;
/// `Σ|c|` of the 5-point first-derivative stencil, times `η`.
const STENCIL_D1: f64 = 18.0 / 12.0;
/// `Σ|c|` of the 5-point second-derivative stencil, times `η²`.
const STENCIL_D2: f64 = 64.0 / 12.0;

/// 5-point central differences of `f` at `t` with step `eta`.
pub(crate) fn stencil<F: Fn(f64) -> f64>(f: F, t: f64, eta: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (f(t - 2.0 * eta), f(t - eta), f(t), f(t + eta), f(t + 2.0 * eta));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * eta);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * eta * eta);
    (d1, d2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularDerivatives {
    /// Swept angles (radians).
    pub angles: Vec<f64>,
    pub sigma: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Step, `2π/n`.
    pub eta: f64,
    /// Propagated budget: `3 ε Σ|c| / η^k`.
    pub noise_d1: f64,
    pub noise_d2: f64,
    /// `|D_η − D_{2η}| / 15` per angle.
    pub truncation_d1: Vec<f64>,
    pub truncation_d2: Vec<f64>,
    /// Interpolation error, from a spline on every other knot.
    pub interpolation_d1: Vec<f64>,
    pub interpolation_d2: Vec<f64>,
    pub max_gap: f64,
    pub relative_budget: f64,
    pub inconclusive: bool,
}

/// `σ′` and `σ″` at each swept angle, differentiating the periodic interpolant
/// with step `η = max(2°, ε^{1/3})` snapped to `2π/n`.
pub fn angular_derivatives(sweep: &DirectionSweep) -> Result<AngularDerivatives> {
    let spline = sweep.spline()?;
    let angles = sweep.angles();
    let eps_rel = sweep.max_relative_budget();
    let eps_abs = sweep.max_budget();
    let target = MIN_STEP_DEG.to_radians().max(eps_rel.cbrt());
    let n = ((TAU / target).floor() as usize).max(8);
    let eta = TAU / n as f64;

    let half = if angles.len() >= 6 {
        let (k, v): (Vec<f64>, Vec<f64>) = angles
            .iter()
            .zip(sweep.sigmas())
            .step_by(2)
            .map(|(a, s)| (*a, s))
            .unzip();
        Some(PeriodicSpline::new(&k, &v)?)
    } else {
        None
    };

    let f = |t: f64| spline.eval(t);
    let mut out = AngularDerivatives {
        angles: angles.clone(),
        sigma: sweep.sigmas(),
        d1: vec![],
        d2: vec![],
        eta,
        noise_d1: 3.0 * eps_abs * STENCIL_D1 / eta,
        noise_d2: 3.0 * eps_abs * STENCIL_D2 / (eta * eta),
        truncation_d1: vec![],
        truncation_d2: vec![],
        interpolation_d1: vec![],
        interpolation_d2: vec![],
        max_gap: spline.max_gap(),
        relative_budget: eps_rel,
        inconclusive: eps_rel > INCONCLUSIVE_BUDGET,
    };
    for &t in &angles {
        let (d1, d2) = stencil(f, t, eta);
        let (e1, e2) = stencil(f, t, 2.0 * eta);
        out.d1.push(d1);
        out.d2.push(d2);
        out.truncation_d1.push((d1 - e1).abs() / 15.0);
        out.truncation_d2.push((d2 - e2).abs() / 15.0);
        let (i1, i2) = match &half {
            // halving the knot spacing: O(h³) for σ′, O(h²) for σ″
            Some(h) => {
                let (h1, h2) = stencil(|x| h.eval(x), t, eta);
                ((d1 - h1).abs() / 7.0, (d2 - h2).abs() / 3.0)
            }
            None => (0.0, 0.0),
        };
        out.interpolation_d1.push(i1);
        out.interpolation_d2.push(i2);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub angles_deg: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_err: Vec<f64>,
    pub dsigma: Vec<f64>,
    pub d2sigma: Vec<f64>,
    /// `σ + σ″ − σ₀`.
    pub hessian_gap: Vec<f64>,
    pub b_probe: Vec<f64>,
    pub sigma0: f64,
    pub min_gap: f64,
    pub min_gap_angle_deg: f64,
    /// Per-angle uncertainty of the gap.
    pub gap_uncertainty: Vec<f64>,
    /// Largest per-angle uncertainty.
    pub noise_floor: f64,
    /// Angles where the gap lies below minus its uncertainty.
    pub flagged_deg: Vec<f64>,
    pub eta: f64,
    pub max_gap_deg: f64,
    pub inconclusive: bool,
    pub verdict: String,
}

/// Tangential Hessian gap `σ + σ″ − σ₀(θ̂)` over the sweep.
pub fn convexity_report(sweep: &DirectionSweep, theta_hat: f64) -> Result<ConvexityReport> {
    let d = angular_derivatives(sweep)?;
    let s0 = sigma0(theta_hat);
    let eps_abs = sweep.max_budget();
    let sigma_err: Vec<f64> = sweep.entries.iter().map(|e| e.budget()).collect();
    let hessian_gap: Vec<f64> = d.sigma.iter().zip(&d.d2).map(|(s, s2)| s + s2 - s0).collect();
    let gap_uncertainty: Vec<f64> = (0..d.angles.len())
        .map(|k| 3.0 * eps_abs + d.noise_d2 + d.truncation_d2[k] + d.interpolation_d2[k])
        .collect();
    let (k_min, &min_gap) = hessian_gap
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("sweeps are non-empty");
    let noise_floor = gap_uncertainty.iter().cloned().fold(0.0, f64::max);
    let flagged_deg: Vec<f64> = hessian_gap
        .iter()
        .zip(&gap_uncertainty)
        .zip(&d.angles)
        .filter(|((g, u), _)| **g < -**u)
        .map(|(_, t)| t.to_degrees())
        .collect();
    let verdict = if d.inconclusive {
        format!(
            "inconclusive: relative error budget {:.2e} exceeds {INCONCLUSIVE_BUDGET:.0e}",
            d.relative_budget
        )
    } else if !flagged_deg.is_empty() {
        format!(
            "violation: gap below minus its uncertainty at {} angle(s); min gap {min_gap:.3e}",
            flagged_deg.len()
        )
    } else if min_gap.abs() <= gap_uncertainty[k_min] {
        format!(
            "bound attained within noise: min gap {min_gap:.3e} ± {:.3e}",
            gap_uncertainty[k_min]
        )
    } else {
        format!(
            "strict: min gap {min_gap:.3e} exceeds its uncertainty {:.3e}",
            gap_uncertainty[k_min]
        )
    };
    Ok(ConvexityReport {
        angles_deg: d.angles.iter().map(|t| t.to_degrees()).collect(),
        sigma: d.sigma.clone(),
        sigma_err,
        dsigma: d.d1.clone(),
        d2sigma: d.d2.clone(),
        hessian_gap,
        b_probe: d.d1.clone(),
        sigma0: s0,
        min_gap,
        min_gap_angle_deg: d.angles[k_min].to_degrees(),
        gap_uncertainty,
        noise_floor,
        flagged_deg,
        eta: d.eta,
        max_gap_deg: d.max_gap.to_degrees(),
        inconclusive: d.inconclusive,
        verdict,
    })
}

/// Tangential component `σ′` of `∇σ̃` on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BProbe {
    pub angles_deg: Vec<f64>,
    pub sigma_prime: Vec<f64>,
    pub max_abs: f64,
    pub max_abs_angle_deg: f64,
    pub noise_floor: f64,
    /// `max|σ′|` exceeds the noise floor.
    pub distinguishable: bool,
    pub verdict: String,
}

pub fn b_probe(sweep: &DirectionSweep) -> Result<BProbe> {
    let d = angular_derivatives(sweep)?;
    let (k, max_abs) = d
        .d1
        .iter()
        .map(|v| v.abs())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("sweeps are non-empty");
    let trunc = d.truncation_d1.iter().cloned().fold(0.0, f64::max);
    let interp = d.interpolation_d1.iter().cloned().fold(0.0, f64::max);
    let noise_floor = d.noise_d1 + trunc + interp;
    let distinguishable = max_abs > noise_floor;
    let verdict = if distinguishable {
        format!(
            "max|σ′| = {max_abs:.3e} exceeds the noise floor {noise_floor:.3e}: σ is anisotropic, \
             the tangential gradient component is nonzero"
        )
    } else {
        format!(
            "max|σ′| = {max_abs:.3e} not distinguishable from 0 (noise floor {noise_floor:.3e}): \
             consistent with a vanishing tangential component and constant σ"
        )
    };
    Ok(BProbe {
        angles_deg: d.angles.iter().map(|t| t.to_degrees()).collect(),
        sigma_prime: d.d1,
        max_abs,
        max_abs_angle_deg: d.angles[k].to_degrees(),
        noise_floor,
        distinguishable,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{synthetic, uniform};
    use super::*;

    const MM: f64 = 1.885_618_083_164_126_7;

    #[test]
    fn constant_sigma_has_zero_derivatives() {
        let s = synthetic(&uniform(40), |_| MM, 1e-8);
        let d = angular_derivatives(&s).unwrap();
        assert!((d.eta - TAU / 180.0).abs() < 1e-15);
        for k in 0..d.angles.len() {
            assert!(d.d1[k].abs() <= d.noise_d1);
            assert!(d.d2[k].abs() <= d.noise_d2);
        }
        let r = convexity_report(&s, 1.0).unwrap();
        assert!(r.min_gap.abs() <= r.noise_floor);
        assert!(r.verdict.starts_with("bound attained"), "{}", r.verdict);
        let b = b_probe(&s).unwrap();
        assert!(!b.distinguishable);
    }

    #[test]
    fn step_follows_the_budget() {
        // ε = 1e-3 relative → η ≈ 0.1 rad
        let s = synthetic(&uniform(40), |_| 1.0, 1e-3);
        let d = angular_derivatives(&s).unwrap();
        let n = (TAU / 0.1).floor();
        assert!((d.eta - TAU / n).abs() < 1e-12);
        assert!(!d.inconclusive);
        let noisy = synthetic(&uniform(40), |_| 1.0, 2e-2);
        assert!(convexity_report(&noisy, 1.0).unwrap().verdict.starts_with("inconclusive"));
    }

    #[test]
    fn derivatives_of_a_known_anisotropy() {
        let sig = |t: f64| 2.0 + 0.05 * (2.0 * t).cos();
        let s = synthetic(&uniform(80), sig, 1e-9);
        let d = angular_derivatives(&s).unwrap();
        for k in 0..d.angles.len() {
            let t = d.angles[k];
            // central differences of the exact function, step η
            let (e1, e2) = stencil(sig, t, d.eta);
            let tol1 = d.noise_d1 + d.truncation_d1[k] + d.interpolation_d1[k] + 1e-6;
            let tol2 = d.noise_d2 + d.truncation_d2[k] + d.interpolation_d2[k] + 1e-5;
            assert!((d.d1[k] - e1).abs() <= tol1, "{t}");
            assert!((d.d2[k] - e2).abs() <= tol2, "{t}");
            assert!((d.d1[k] + 0.1 * (2.0 * t).sin()).abs() < 1e-3);
            assert!((d.d2[k] + 0.2 * (2.0 * t).cos()).abs() < 1e-3);
        }
        // σ + σ″ − σ₀ = 2 − 0.15 cos 2θ − σ₀(θ̂)
        let r = convexity_report(&s, 1.0).unwrap();
        assert!((r.min_gap - (1.85 - MM)).abs() < 1e-3);
        assert!(r.flagged_deg.len() > 0);
        assert!(r.verdict.starts_with("violation"));
        assert!(b_probe(&s).unwrap().distinguishable);
    }

    #[test]
    fn first_derivative_sums_to_zero_on_the_circle() {
        let s = synthetic(&uniform(37), |t| 1.0 + 0.2 * (t.sin() + 0.3 * (3.0 * t).cos()).powi(2), 0.0);
        let spline = s.spline().unwrap();
        let n = 180;
        let eta = TAU / n as f64;
        let total: f64 = (0..n).map(|i| stencil(|x| spline.eval(x), i as f64 * eta, eta).0).sum();
        assert!(total.abs() < 1e-10, "{total}");
    }

    #[test]
    fn symmetric_anisotropy_is_critical_on_the_diagonal() {
        // σ(θ) = σ(π/2 − θ)
        let sig = |t: f64| 2.0 + 0.03 * (4.0 * t).cos() + 0.01 * (2.0 * t).sin();
        let s = synthetic(&uniform(72), sig, 1e-7);
        let d = angular_derivatives(&s).unwrap();
        let k = d.angles.iter().position(|t| (t - TAU / 8.0).abs() < 1e-12).unwrap();
        assert!(d.d1[k].abs() <= d.noise_d1 + d.truncation_d1[k] + d.interpolation_d1[k] + 1e-12);
    }
}
