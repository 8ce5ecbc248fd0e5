//! Quick invariant battery on small grids.

use std::f64::consts::TAU;

use clap::ValueEnum;

use geosigma::analyzer::{convexity_report, direction_sweep, wulff_shape_2d, SweepOptions};
use geosigma::eikonal::{
    check_distance_bounds, dijkstra_distance_oracle, solve_signed_distance, Neighborhood, StripGrid,
};
use geosigma::medium::{CoefficientField, DirectionFrame, Expr};
use geosigma::oracle::{laminate_sigma_1d, minimize_cell_energy, BoundaryCondition, CellProblem, OptimizerOptions};
use geosigma::profile::{f_t, q, q_t, qtq_bound, sandwich_margin, sech4_sqrt2, sigma0, w, ProfileParams};
use geosigma::sigma::{equipartition_residual, sigma_estimate, SigmaOptions};
use geosigma::Result;

const SMOOTH: &str = "1 + 0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2";
const LAMINATE: &str = "1 + 0.5*sin(2*pi*x1)^2";
const MM: f64 = 1.885_618_083_164_126_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Profile,
    Eikonal,
    Sigma,
    Oracle,
    Analyzer,
}

pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    run: fn() -> Result<(bool, String)>,
}

pub struct Outcome {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: Suite, name: &'static str, run: fn() -> Result<(bool, String)>) -> Check {
    Check { suite, name, run }
}

fn battery() -> Vec<Check> {
    vec![
        check(Suite::Profile, "integrand identity", integrand_identity),
        check(Suite::Profile, "q_T sandwich and bound", qt_estimates),
        check(Suite::Profile, "F_T monotone", f_t_monotone),
        check(Suite::Eikonal, "constant medium is linear", constant_linear),
        check(Suite::Eikonal, "metric bounds", metric_bounds),
        check(Suite::Eikonal, "graph oracle agreement", graph_oracle),
        check(Suite::Sigma, "Modica-Mortola calibration", calibration),
        check(Suite::Sigma, "laminate closed form", laminate),
        check(Suite::Sigma, "equipartition", equipartition),
        check(Suite::Oracle, "cell energy of a constant medium", oracle_constant),
        check(Suite::Analyzer, "sweep evenness and lower bound", sweep_invariants),
        check(Suite::Analyzer, "isotropic Wulff disk", wulff_disk),
    ]
}

pub fn run(suite: Suite) -> Vec<Outcome> {
    battery()
        .into_iter()
        .filter(|c| suite == Suite::All || c.suite == suite)
        .map(|c| {
            let (passed, detail) = match (c.run)() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            Outcome {
                suite: c.suite,
                name: c.name,
                passed,
                detail,
            }
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn integrand_identity() -> Result<(bool, String)> {
    let worst = (0..=400)
        .map(|k| -4.0 + 0.02 * k as f64)
        .map(|h| (w(q(h)) - sech4_sqrt2(h)).abs())
        .fold(0.0, f64::max);
    Ok((worst < 1e-14, format!("max |W(q(h)) - sech^4| = {worst:.1e}")))
}

fn qt_estimates() -> Result<(bool, String)> {
    let mut worst: f64 = f64::INFINITY;
    for t in [3.0, 5.0, 8.0] {
        let p = ProfileParams::new(t, 1.0)?;
        for k in 0..=600 {
            let z = -3.0 + 0.01 * k as f64;
            worst = worst.min(sandwich_margin(z, &p));
            worst = worst.min(qtq_bound(z, &p) - (q_t(z, &p) - q(z)).abs());
        }
    }
    Ok((worst >= -1e-10, format!("smallest margin {worst:.2e}")))
}

fn f_t_monotone() -> Result<(bool, String)> {
    let p = ProfileParams::new(3.0, 1.0)?;
    let vals: Vec<f64> = (0..=200).map(|k| f_t(-10.0 + 0.1 * k as f64, &p)).collect::<Result<_>>()?;
    let ok = vals.windows(2).all(|v| v[1] > v[0]);
    Ok((ok, "201 increasing samples".into()))
}

fn constant_linear() -> Result<(bool, String)> {
    let field = CoefficientField::parse("1", 2)?;
    let frame = DirectionFrame::rational(&[1, 2])?;
    let df = solve_signed_distance(&field, &StripGrid::periodic(&field, &frame, 1.0 / 16.0, 3.0, 1)?)?;
    let g = df.grid();
    let worst = (0..g.len())
        .map(|i| (df.h()[i] - g.row_s(i / g.row_len())).abs())
        .fold(0.0, f64::max);
    Ok((worst < 1e-12, format!("max |h - x.nu| = {worst:.1e}")))
}

fn metric_bounds() -> Result<(bool, String)> {
    let field = CoefficientField::parse(SMOOTH, 2)?;
    let mut violations = 0;
    for p in [[1, 0], [1, 1], [1, 2]] {
        let frame = DirectionFrame::rational(&p)?;
        let df = solve_signed_distance(&field, &StripGrid::periodic(&field, &frame, 1.0 / 32.0, 3.0, 1)?)?;
        violations += check_distance_bounds(&df).violations;
    }
    Ok((violations == 0, format!("{violations} violating nodes")))
}

fn graph_oracle() -> Result<(bool, String)> {
    let field = CoefficientField::parse(SMOOTH, 2)?;
    let frame = DirectionFrame::rational(&[1, 0])?;
    let delta = 1.0 / 64.0;
    let grid = StripGrid::periodic(&field, &frame, delta, 1.0, 1)?;
    let sweep = solve_signed_distance(&field, &grid)?;
    let graph = dijkstra_distance_oracle(&field, &grid, Neighborhood::N16)?;
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        if grid.row_s(i / grid.row_len()) >= 10.0 * delta {
            worst = worst.max(rel(graph.h()[i], sweep.h()[i]));
        }
    }
    Ok((worst <= 0.03, format!("max relative difference {worst:.2e}")))
}

fn calibration() -> Result<(bool, String)> {
    let field = CoefficientField::parse("1", 2)?;
    let opts = SigmaOptions {
        delta: 1.0 / 32.0,
        ..SigmaOptions::default()
    };
    let mut worst: f64 = 0.0;
    for p in [[1, 0], [1, 1], [1, 2]] {
        let e = sigma_estimate(&field, &DirectionFrame::rational(&p)?, &opts)?;
        worst = worst.max(rel(e.sigma_value, MM));
    }
    Ok((worst <= 0.01, format!("max relative error {worst:.2e}")))
}

fn laminate() -> Result<(bool, String)> {
    let field = CoefficientField::parse(LAMINATE, 2)?;
    let e = sigma_estimate(
        &field,
        &DirectionFrame::rational(&[1, 0])?,
        &SigmaOptions {
            delta: 1.0 / 32.0,
            ..SigmaOptions::default()
        },
    )?;
    let exact = laminate_sigma_1d(&Expr::parse(LAMINATE, 2)?, 1e-10)?;
    let r = rel(e.sigma_value, exact);
    Ok((r <= 0.01, format!("{:.6} vs {exact:.6}", e.sigma_value)))
}

fn equipartition() -> Result<(bool, String)> {
    let field = CoefficientField::parse(SMOOTH, 2)?;
    let frame = DirectionFrame::rational(&[1, 0])?;
    let df = solve_signed_distance(&field, &StripGrid::periodic(&field, &frame, 1.0 / 64.0, 4.0, 1)?)?;
    let r = equipartition_residual(&df);
    Ok((r <= 2e-2, format!("residual {r:.3e}")))
}

fn oracle_constant() -> Result<(bool, String)> {
    let field = CoefficientField::parse("1", 2)?;
    let frame = DirectionFrame::rational(&[1, 0])?;
    let cp = CellProblem::new(&field, &frame, 8.0, 1.0 / 16.0, BoundaryCondition::ProfileTrace)?;
    let res = minimize_cell_energy(
        &cp,
        &OptimizerOptions {
            two_starts: false,
            ..OptimizerOptions::default()
        },
    )?;
    let r = rel(res.energy_per_area, MM);
    Ok((res.converged && r <= 0.015, format!("energy {:.6}", res.energy_per_area)))
}

fn small_sweep() -> Result<geosigma::analyzer::DirectionSweep> {
    let field = CoefficientField::parse("1", 2)?;
    direction_sweep(
        &field,
        &SweepOptions {
            max_denominator: 2,
            refine_levels: 0,
            sigma: SigmaOptions {
                delta: 1.0 / 16.0,
                ..SigmaOptions::default()
            },
            ..SweepOptions::default()
        },
    )
}

fn sweep_invariants() -> Result<(bool, String)> {
    let s = small_sweep()?;
    let even = s.evenness().iter().all(|p| p.holds());
    let s0 = sigma0(s.theta_hat);
    let lower = s.sigmas().iter().all(|&v| v >= s0 * 0.99);
    let r = convexity_report(&s, s.theta_hat)?;
    let convex = r.flagged_deg.is_empty();
    Ok((
        even && lower && convex,
        format!("evenness {even}, lower bound {lower}, min gap {:.1e} ± {:.1e}", r.min_gap, r.noise_floor),
    ))
}

fn wulff_disk() -> Result<(bool, String)> {
    let s = small_sweep()?;
    let poly = wulff_shape_2d(&s, 360)?;
    let worst = poly.vertex_radii().iter().map(|&r| rel(r, MM)).fold(0.0, f64::max);
    let ok = poly.is_convex() && worst <= 0.005 && (poly.vertices.len() as f64) > TAU * 50.0;
    Ok((ok, format!("{} vertices, max radius error {worst:.2e}", poly.vertices.len())))
}
