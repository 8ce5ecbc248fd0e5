//! Direction sweeps and the structural probes built on them (2D).

mod convexity;
mod spline;
mod wulff;

pub use convexity::{
    angular_derivatives, b_probe, convexity_report, AngularDerivatives, BProbe, ConvexityReport,
    INCONCLUSIVE_BUDGET,
};
pub use spline::PeriodicSpline;
pub use wulff::{wulff_shape_2d, WulffPolygon};

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::{CoefficientField, DirectionFrame};
use crate::sigma::{sigma_estimate, SigmaEstimate, SigmaOptions};

/// Angular density required by [`sigma_tilde`], in degrees.
pub const DEFAULT_MAX_GAP_DEG: f64 = 2.0;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn angle_of(p: &[i64]) -> f64 {
    (p[1] as f64).atan2(p[0] as f64).rem_euclid(TAU)
}

/// Primitive integer vectors with `max(|p₁|, |p₂|) ≤ q`, sorted by angle in `[0, 2π)`.
pub fn farey_directions(q: u32) -> Vec<[i64; 2]> {
    let q = q as i64;
    let mut out = Vec::new();
    for p1 in -q..=q {
        for p2 in -q..=q {
            if gcd(p1, p2) == 1 {
                out.push([p1, p2]);
            }
        }
    }
    out.sort_by(|a, b| angle_of(a).total_cmp(&angle_of(b)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub p: Vec<i64>,
    /// Angle of `ν` in `[0, 2π)`.
    pub angle: f64,
    pub estimate: SigmaEstimate,
}

impl SweepEntry {
    pub fn sigma(&self) -> f64 {
        self.estimate.sigma_value
    }

    pub fn budget(&self) -> f64 {
        self.estimate.error_budget
    }
}

/// Sampled map `ν ↦ σ(ν)` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionSweep {
    pub entries: Vec<SweepEntry>,
    pub theta_hat: f64,
    pub big_theta_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub max_denominator: u32,
    /// Rounds of mediant insertion next to local extrema.
    pub refine_levels: usize,
    /// Largest `max(|p₁|, |p₂|)` allowed for inserted mediants.
    pub refine_max_denominator: u32,
    pub workers: usize,
    pub sigma: SigmaOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            max_denominator: 8,
            refine_levels: 1,
            refine_max_denominator: 16,
            workers: 1,
            sigma: SigmaOptions::default(),
        }
    }
}

/// Evenness check for one `(ν, −ν)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvennessPair {
    pub p: Vec<i64>,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub difference: f64,
    /// Sum of both error budgets.
    pub budget: f64,
}

impl EvennessPair {
    pub fn holds(&self) -> bool {
        self.difference <= self.budget
    }
}

fn estimate_all(
    field: &CoefficientField,
    vectors: &[[i64; 2]],
    opts: &SigmaOptions,
    pool: &rayon::ThreadPool,
) -> Result<Vec<SweepEntry>> {
    pool.install(|| {
        vectors
            .par_iter()
            .map(|p| {
                let frame = DirectionFrame::rational(p)?;
                Ok(SweepEntry {
                    p: p.to_vec(),
                    angle: frame.angle(),
                    estimate: sigma_estimate(field, &frame, opts)?,
                })
            })
            .collect()
    })
}

fn reduce(p: [i64; 2]) -> [i64; 2] {
    let g = gcd(p[0], p[1]);
    [p[0] / g, p[1] / g]
}

/// Relative difference below which neighbouring samples count as level.
const EXTREMUM_FLOOR: f64 = 1e-9;

/// Mediants next to significant local extrema, closed under `p ↦ −p`.
fn mediants(entries: &[SweepEntry], max_den: u32) -> Vec<[i64; 2]> {
    let n = entries.len();
    let mut out: Vec<[i64; 2]> = Vec::new();
    for k in 0..n {
        let (prev, cur, next) = (&entries[(k + n - 1) % n], &entries[k], &entries[(k + 1) % n]);
        // budgets alone can sit at roundoff level for constant media
        let floor = EXTREMUM_FLOOR * cur.sigma();
        let tol_prev = cur.budget() + prev.budget() + floor;
        let tol_next = cur.budget() + next.budget() + floor;
        let is_max = cur.sigma() > prev.sigma() + tol_prev && cur.sigma() > next.sigma() + tol_next;
        let is_min = cur.sigma() < prev.sigma() - tol_prev && cur.sigma() < next.sigma() - tol_next;
        if !(is_max || is_min) {
            continue;
        }
        for nb in [prev, next] {
            let m = reduce([cur.p[0] + nb.p[0], cur.p[1] + nb.p[1]]);
            if m == [0, 0] || m[0].abs().max(m[1].abs()) > max_den as i64 {
                continue;
            }
            for v in [m, [-m[0], -m[1]]] {
                if !out.contains(&v) && !entries.iter().any(|e| e.p == v) {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// `σ` over the Farey directions, fanned out over `workers` threads.
///
/// Results are merged in angle order, so the output does not depend on the
/// worker count.
pub fn direction_sweep(field: &CoefficientField, opts: &SweepOptions) -> Result<DirectionSweep> {
    if field.dim() != 2 {
        return Err(Error::Unsupported("direction sweeps are 2D only".into()));
    }
    if opts.max_denominator == 0 || opts.workers == 0 {
        return Err(Error::InvalidInput("max_denominator and workers must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let mut entries = estimate_all(field, &farey_directions(opts.max_denominator), &opts.sigma, &pool)?;
    for _ in 0..opts.refine_levels {
        let extra = mediants(&entries, opts.refine_max_denominator.max(opts.max_denominator));
        if extra.is_empty() {
            break;
        }
        entries.extend(estimate_all(field, &extra, &opts.sigma, &pool)?);
        entries.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    }
    DirectionSweep::new(entries, field.theta_hat(), field.big_theta_hat())
}

impl DirectionSweep {
    /// Validates ordering and positivity.
    pub fn new(entries: Vec<SweepEntry>, theta_hat: f64, big_theta_hat: f64) -> Result<DirectionSweep> {
        if entries.len() < 3 {
            return Err(Error::InvalidInput("a sweep needs at least 3 directions".into()));
        }
        if entries.windows(2).any(|w| !(w[1].angle > w[0].angle)) {
            return Err(Error::InvalidInput("sweep angles must increase strictly".into()));
        }
        if let Some(e) = entries.iter().find(|e| !(e.sigma() > 0.0)) {
            return Err(Error::InvalidInput(format!("non-positive sigma at p = {:?}", e.p)));
        }
        Ok(DirectionSweep {
            entries,
            theta_hat,
            big_theta_hat,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.angle).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.entries.iter().map(SweepEntry::sigma).collect()
    }

    /// Largest absolute error budget in the sweep.
    pub fn max_budget(&self) -> f64 {
        self.entries.iter().map(SweepEntry::budget).fold(0.0, f64::max)
    }

    /// Largest budget relative to its `σ`.
    pub fn max_relative_budget(&self) -> f64 {
        self.entries.iter().map(|e| e.budget() / e.sigma()).fold(0.0, f64::max)
    }

    pub fn spline(&self) -> Result<PeriodicSpline> {
        PeriodicSpline::new(&self.angles(), &self.sigmas())
    }

    /// Pairs `(ν, −ν)` present in the sweep, one per pair.
    pub fn evenness(&self) -> Vec<EvennessPair> {
        let mut out = Vec::new();
        for e in &self.entries {
            if e.angle >= std::f64::consts::PI {
                continue;
            }
            let neg: Vec<i64> = e.p.iter().map(|c| -c).collect();
            if let Some(m) = self.entries.iter().find(|x| x.p == neg) {
                out.push(EvennessPair {
                    p: e.p.clone(),
                    sigma_plus: e.sigma(),
                    sigma_minus: m.sigma(),
                    difference: (e.sigma() - m.sigma()).abs(),
                    budget: e.budget() + m.budget(),
                });
            }
        }
        out
    }
}

/// One-homogeneous extension `σ̃(w) = |w| σ(w/|w|)` through a periodic spline.
#[derive(Debug, Clone)]
pub struct SigmaTilde {
    spline: PeriodicSpline,
}

impl SigmaTilde {
    /// Fails if consecutive swept angles are more than `max_gap_deg` apart.
    pub fn new(sweep: &DirectionSweep, max_gap_deg: f64) -> Result<SigmaTilde> {
        let spline = sweep.spline()?;
        let gap = spline.max_gap().to_degrees();
        if gap > max_gap_deg {
            return Err(Error::InvalidInput(format!(
                "sweep too sparse: max angular gap {gap:.2}° exceeds {max_gap_deg}°"
            )));
        }
        Ok(SigmaTilde { spline })
    }

    pub fn spline(&self) -> &PeriodicSpline {
        &self.spline
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        let r = w[0].hypot(w[1]);
        if r == 0.0 {
            return 0.0;
        }
        r * self.spline.eval(w[1].atan2(w[0]))
    }
}

/// `σ̃(w)` with the default density requirement.
pub fn sigma_tilde(w: &[f64], sweep: &DirectionSweep) -> Result<f64> {
    if w.len() != 2 {
        return Err(Error::InvalidInput(format!("w must have 2 components, got {}", w.len())));
    }
    Ok(SigmaTilde::new(sweep, DEFAULT_MAX_GAP_DEG)?.eval(w))
}
