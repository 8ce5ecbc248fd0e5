//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::io::Write;
use std::time::Instant;

use geosigma::analyzer::{convexity_report, direction_sweep, DirectionSweep, SweepOptions};
use geosigma::eikonal::{
    check_distance_bounds, dijkstra_distance_oracle, solve_signed_distance, Neighborhood, StripGrid,
};
use geosigma::medium::{CoefficientField, DirectionFrame, Expr};
use geosigma::oracle::{
    laminate_sigma_1d, minimize_cell_energy, BoundaryCondition, CellProblem, OptimizerOptions,
};
use geosigma::profile::{q, q_t, qtq_bound, sandwich_margin, sigma0, ProfileParams};
use geosigma::sigma::{equipartition_residual, metric_slope_c, sigma_estimate, SigmaOptions};
use geosigma::Result;

const SMOOTH: &str = "1 + 0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2";
const LAMINATE: &str = "1 + 0.5*sin(2*pi*x1)^2";
const MEDIA: [&str; 4] = ["1", "4", LAMINATE, SMOOTH];
const CALIBRATION_DIRS: [[i64; 2]; 4] = [[1, 0], [0, 1], [1, 1], [1, 2]];
const CROSS_CHECK_DIRS: [[i64; 2]; 3] = [[1, 0], [1, 1], [1, 2]];
const SWEEP_DELTA: f64 = 1.0 / 32.0;

struct Gate {
    failed: usize,
    total: usize,
}

impl Gate {
    fn report(&mut self, id: u32, name: &str, outcome: Result<(bool, String)>) {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.total += 1;
        if !ok {
            self.failed += 1;
        }
        println!("{}  [{id:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        std::io::stdout().flush().ok();
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn field(expr: &str) -> Result<CoefficientField> {
    CoefficientField::parse(expr, 2)
}

fn frame(p: [i64; 2]) -> Result<DirectionFrame> {
    DirectionFrame::rational(&p)
}

fn calibration(expr: &str, exact: f64) -> Result<(bool, String)> {
    let f = field(expr)?;
    let opts = SigmaOptions {
        delta: 1.0 / 64.0,
        eps_tail: 1e-8,
        ..SigmaOptions::default()
    };
    let mut worst: f64 = 0.0;
    for p in CALIBRATION_DIRS {
        worst = worst.max(rel(sigma_estimate(&f, &frame(p)?, &opts)?.sigma_value, exact));
    }
    Ok((worst <= 0.01, format!("max relative error {worst:.2e} vs {exact:.6} (tol 1e-2)")))
}

fn laminate() -> Result<(bool, String)> {
    let f = field(LAMINATE)?;
    let opts = SigmaOptions {
        delta: 1.0 / 64.0,
        ..SigmaOptions::default()
    };
    let geo = sigma_estimate(&f, &frame([1, 0])?, &opts)?.sigma_value;
    let exact = laminate_sigma_1d(&Expr::parse(LAMINATE, 2)?, 1e-10)?;
    let r = rel(geo, exact);
    Ok((r <= 0.01, format!("pipeline {geo:.6}, closed form {exact:.6}, relative {r:.2e} (tol 1e-2)")))
}

fn cross_check() -> Result<(bool, String)> {
    let f = field(SMOOTH)?;
    let (t, delta) = (8.0, 1.0 / 32.0);
    let opts = SigmaOptions {
        delta,
        ..SigmaOptions::default()
    };
    let (mut worst_geo, mut worst_bc): (f64, f64) = (0.0, 0.0);
    let mut converged = true;
    for p in CROSS_CHECK_DIRS {
        let fr = frame(p)?;
        let geo = sigma_estimate(&f, &fr, &opts)?.sigma_value;
        let mut energies = Vec::new();
        for bc in [BoundaryCondition::MollifiedStep, BoundaryCondition::ProfileTrace] {
            let cp = CellProblem::new(&f, &fr, t, delta, bc)?;
            let res = minimize_cell_energy(&cp, &OptimizerOptions::default())?;
            converged &= res.converged;
            worst_geo = worst_geo.max(rel(geo, res.energy_per_area));
            energies.push(res.energy_per_area);
        }
        worst_bc = worst_bc.max(rel(energies[0], energies[1]));
    }
    Ok((
        converged && worst_geo <= 0.03 && worst_bc <= 0.02,
        format!("max geodesic/oracle gap {worst_geo:.2e} (tol 3e-2), max BC disagreement {worst_bc:.2e} (tol 2e-2)"),
    ))
}

fn distance_bounds() -> Result<(bool, String)> {
    let (mut violations, mut nodes) = (0, 0);
    let mut worst: f64 = 0.0;
    for expr in MEDIA {
        let f = field(expr)?;
        for p in CALIBRATION_DIRS {
            let df = solve_signed_distance(&f, &StripGrid::periodic(&f, &frame(p)?, 1.0 / 64.0, 4.0, 1)?)?;
            let r = check_distance_bounds(&df);
            violations += r.violations;
            nodes += r.nodes;
            worst = worst.max(r.worst_violation);
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violating nodes of {nodes}; worst excursion {worst:.2} δ (slack 2√Θ̂ δ)"),
    ))
}

fn graph_oracle() -> Result<(bool, String)> {
    let f = field(SMOOTH)?;
    let delta = 1.0 / 256.0;
    let grid = StripGrid::periodic(&f, &frame([1, 0])?, delta, 0.5, 1)?;
    let sweep = solve_signed_distance(&f, &grid)?;
    let graph = dijkstra_distance_oracle(&f, &grid, Neighborhood::N16)?;
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        if grid.row_s(i / grid.row_len()).abs() >= 10.0 * delta {
            worst = worst.max(rel(graph.h()[i], sweep.h()[i]));
        }
    }
    Ok((
        worst <= 0.03,
        format!("{}x{} grid, max relative difference {worst:.2e} (tol 3e-2)", grid.n_rows(), grid.row_len()),
    ))
}

fn equipartition() -> Result<(bool, String)> {
    let f = field(SMOOTH)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in CROSS_CHECK_DIRS {
        let fr = frame(p)?;
        let r = |d: f64| -> Result<f64> {
            Ok(equipartition_residual(&solve_signed_distance(&f, &StripGrid::periodic(&f, &fr, d, 4.0, 1)?)?))
        };
        let (coarse, fine) = (r(1.0 / 64.0)?, r(1.0 / 128.0)?);
        let ratio = coarse / fine;
        ok &= coarse <= 2e-2 && (1.4..=2.6).contains(&ratio);
        parts.push(format!("{p:?}: {coarse:.2e}, ratio {ratio:.2}"));
    }
    Ok((ok, format!("{} (tol 2e-2, ratio in [1.4, 2.6])", parts.join("; "))))
}

fn sweep(expr: &str, q: u32, workers: usize) -> Result<DirectionSweep> {
    direction_sweep(
        &field(expr)?,
        &SweepOptions {
            max_denominator: q,
            workers,
            sigma: SigmaOptions {
                delta: SWEEP_DELTA,
                ..SigmaOptions::default()
            },
            ..SweepOptions::default()
        },
    )
}

fn evenness(sweeps: &[(&str, DirectionSweep)]) -> Result<(bool, String)> {
    let (mut pairs, mut bad) = (0, 0);
    let mut worst: f64 = 0.0;
    for (_, s) in sweeps {
        for p in s.evenness() {
            pairs += 1;
            bad += usize::from(!p.holds());
            worst = worst.max(p.difference);
        }
    }
    let covered = sweeps.iter().all(|(_, s)| 2 * s.evenness().len() == s.len());
    Ok((
        bad == 0 && covered,
        format!("{pairs} pairs over {} media, {bad} outside budget, max |σ(ν) − σ(−ν)| {worst:.2e}", sweeps.len()),
    ))
}

fn lower_bound(sweeps: &[(&str, DirectionSweep)]) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (expr, s) in sweeps {
        let s0 = sigma0(s.theta_hat);
        let min = s.sigmas().into_iter().fold(f64::INFINITY, f64::min);
        ok &= min >= s0 * 0.99;
        parts.push(format!("a = {expr}: min σ/σ₀ = {:.4}", min / s0));
    }
    Ok((ok, parts.join("; ")))
}

fn metric_slope() -> Result<(bool, String)> {
    let f = field(SMOOTH)?;
    let (lo, hi) = (f.theta_hat().sqrt() - 0.02, f.big_theta_hat().sqrt() + 0.02);
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [[1, 0], [1, 2]] {
        let s = metric_slope_c(&f, &frame(p)?, &[1, 2, 4, 8], SWEEP_DELTA)?;
        ok &= s.c.iter().all(|c| (lo..=hi).contains(c)) && s.spread <= 0.03;
        let cs: Vec<String> = s.c.iter().map(|c| format!("{c:.4}")).collect();
        parts.push(format!("{p:?}: c_m = [{}], spread {:.2e}", cs.join(", "), s.spread));
    }
    Ok((ok, format!("{} (bounds [{lo:.4}, {hi:.4}])", parts.join("; "))))
}

fn convexity(sweeps: &[(&str, DirectionSweep)]) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (expr, s) in sweeps {
        let r = convexity_report(s, s.theta_hat)?;
        ok &= r.flagged_deg.is_empty() && r.min_gap >= -r.noise_floor;
        if *expr == "1" {
            ok &= r.min_gap.abs() <= r.noise_floor;
        }
        parts.push(format!("a = {expr}: min gap {:.2e}, noise floor {:.2e}", r.min_gap, r.noise_floor));
    }
    Ok((ok, parts.join("; ")))
}

fn qt_estimates() -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    let mut points = 0;
    for big in [1.0, 1.5, 4.0] {
        for t in [3.0, 5.0, 8.0] {
            let p = ProfileParams::new(t, big)?;
            for k in 0..=600 {
                let z = -3.0 + 0.01 * k as f64;
                worst = worst.min(sandwich_margin(z, &p) + 1e-10);
                worst = worst.min(qtq_bound(z, &p) - (q_t(z, &p) - q(z)).abs() + 1e-10);
                points += 1;
            }
        }
    }
    Ok((worst >= 0.0, format!("{points} points, smallest margin incl. 1e-10 slack {worst:.2e}")))
}

fn determinism() -> Result<(bool, String)> {
    let serial = serde_json::to_vec(&sweep(SMOOTH, 3, 1)?).expect("sweeps serialize");
    let parallel = serde_json::to_vec(&sweep(SMOOTH, 3, 8)?).expect("sweeps serialize");
    Ok((serial == parallel, format!("{} bytes, identical: {}", serial.len(), serial == parallel)))
}

fn main() {
    let start = Instant::now();
    let mut gate = Gate { failed: 0, total: 0 };
    let mm = 4.0 * 2f64.sqrt() / 3.0;
    gate.report(1, "calibration a≡1", calibration("1", mm));
    gate.report(2, "constant-medium scaling a≡4", calibration("4", 2.0 * mm));
    gate.report(3, "laminate closed form", laminate());
    gate.report(4, "variational cross-check", cross_check());
    gate.report(5, "distance bounds", distance_bounds());
    gate.report(6, "fast sweeping vs 16-neighbour graph", graph_oracle());
    gate.report(7, "equipartition", equipartition());

    let mut sweeps = Vec::new();
    for expr in MEDIA {
        match sweep(expr, 5, 1) {
            Ok(s) => sweeps.push((expr, s)),
            Err(e) => println!("sweep of a = {expr} failed: {e}"),
        }
    }
    let all_swept = sweeps.len() == MEDIA.len();
    let gated = |r: Result<(bool, String)>| r.map(|(ok, d)| (ok && all_swept, d));
    gate.report(8, "evenness", gated(evenness(&sweeps)));
    gate.report(9, "lower bound", gated(lower_bound(&sweeps)));
    gate.report(10, "metric slope", metric_slope());
    gate.report(11, "convexity", gated(convexity(&sweeps)));
    gate.report(12, "q_T estimates", qt_estimates());
    gate.report(13, "determinism", determinism());

    println!(
        "acceptance: {}/{} passed in {:.1} s",
        gate.total - gate.failed,
        gate.total,
        start.elapsed().as_secs_f64()
    );
    if gate.failed > 0 {
        std::process::exit(1);
    }
}
