//! Command pipelines.

use serde::Serialize;

use geosigma::analyzer::{
    b_probe, convexity_report, direction_sweep, wulff_shape_2d, DirectionSweep, SweepOptions,
};
use geosigma::medium::{CoefficientField, DirectionFrame};
use geosigma::oracle::{minimize_cell_energy, CellProblem};
use geosigma::profile::sigma0;
use geosigma::sigma::{metric_slope_c, sigma_estimate, SigmaEstimate, SigmaOptions};

use crate::config::RunConfig;
use crate::error::{CliError, InModule};
use crate::output::Output;

/// Default Farey bound when the config names none.
pub const DEFAULT_FAREY: u32 = 8;

fn field(cfg: &RunConfig) -> Result<CoefficientField, CliError> {
    CoefficientField::parse(&cfg.medium.expr, cfg.medium.dim).map_err(|e| CliError::Config {
        key: "medium.expr".into(),
        message: e.to_string(),
    })
}

fn need_p(cfg: &RunConfig) -> Result<DirectionFrame, CliError> {
    let p = cfg.direction.p.as_ref().ok_or_else(|| CliError::Config {
        key: "direction.p".into(),
        message: "this command needs an integer direction".into(),
    })?;
    DirectionFrame::rational(p).in_module("medium")
}

fn frames(cfg: &RunConfig) -> Result<Vec<DirectionFrame>, CliError> {
    let mut out = Vec::new();
    if let Some(p) = &cfg.direction.p {
        out.push(DirectionFrame::rational(p).in_module("medium")?);
    }
    if let Some(angles) = &cfg.direction.angles_deg {
        if cfg.medium.dim != 2 {
            return Err(CliError::Config {
                key: "direction.angles_deg".into(),
                message: "angles are only meaningful in 2D".into(),
            });
        }
        for a in angles {
            let t = a.to_radians();
            out.push(DirectionFrame::from_vector(&[t.cos(), t.sin()]).in_module("medium")?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config {
            key: "direction.p".into(),
            message: "give direction.p or direction.angles_deg".into(),
        });
    }
    Ok(out)
}

/// The serde name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(String::from))
        .unwrap_or_default()
}

fn p_string(p: &Option<Vec<i64>>) -> String {
    p.as_ref()
        .map(|v| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

#[derive(Serialize)]
struct SigmaRow {
    p: String,
    angle_deg: f64,
    sigma: f64,
    error_budget: f64,
    extrapolation_delta: f64,
    tail_bound: f64,
    delta: f64,
    t_min: f64,
    t_max: f64,
    warnings: String,
}

impl SigmaRow {
    fn new(e: &SigmaEstimate) -> SigmaRow {
        SigmaRow {
            p: p_string(&e.integer_vector),
            angle_deg: e.nu[1].atan2(e.nu[0]).to_degrees(),
            sigma: e.sigma_value,
            error_budget: e.error_budget,
            extrapolation_delta: e.extrapolation_delta,
            tail_bound: e.tail_bound,
            delta: e.delta,
            t_min: e.t_schedule[0],
            t_max: *e.t_schedule.last().unwrap(),
            warnings: e.warnings.join("; "),
        }
    }
}

pub fn sigma(cfg: &RunConfig, out: &mut Output) -> Result<Vec<String>, CliError> {
    let field = field(cfg)?;
    let opts = cfg.sigma_options();
    let mut estimates = Vec::new();
    for f in frames(cfg)? {
        estimates.push(sigma_estimate(&field, &f, &opts).in_module("sigma")?);
    }
    let rows: Vec<SigmaRow> = estimates.iter().map(SigmaRow::new).collect();
    out.csv("sigma.csv", &rows)?;
    out.json("sigma.json", &estimates)?;
    Ok(rows
        .iter()
        .map(|r| format!("nu = [{}] angle {:.4}°: sigma = {:.6} ± {:.2e}", r.p, r.angle_deg, r.sigma, r.error_budget))
        .collect())
}

fn run_sweep(cfg: &RunConfig, workers: usize) -> Result<(CoefficientField, DirectionSweep), CliError> {
    let field = field(cfg)?;
    if field.dim() != 2 {
        return Err(CliError::Config {
            key: "medium.dim".into(),
            message: "direction sweeps are 2D only".into(),
        });
    }
    let s = &cfg.numerics.sweep;
    let opts = SweepOptions {
        max_denominator: cfg.direction.farey_max_denominator.unwrap_or(DEFAULT_FAREY),
        refine_levels: s.refine_levels,
        refine_max_denominator: s.refine_max_denominator,
        workers,
        sigma: cfg.sigma_options(),
    };
    let sweep = direction_sweep(&field, &opts).in_module("analyzer")?;
    Ok((field, sweep))
}

#[derive(Serialize)]
struct SweepRow {
    p1: i64,
    p2: i64,
    theta_deg: f64,
    sigma: f64,
    sigma_err: f64,
    extrapolation_delta: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct EvenRow {
    p1: i64,
    p2: i64,
    sigma_plus: f64,
    sigma_minus: f64,
    difference: f64,
    budget: f64,
    holds: bool,
}

#[derive(Serialize)]
struct SweepSummary {
    directions: usize,
    theta_hat: f64,
    big_theta_hat: f64,
    sigma0: f64,
    min_sigma: f64,
    lower_bound_holds: bool,
    evenness_pairs: usize,
    evenness_holds: bool,
}

fn write_sweep(sweep: &DirectionSweep, out: &mut Output) -> Result<SweepSummary, CliError> {
    let rows: Vec<SweepRow> = sweep
        .entries
        .iter()
        .map(|e| SweepRow {
            p1: e.p[0],
            p2: e.p[1],
            theta_deg: e.angle.to_degrees(),
            sigma: e.sigma(),
            sigma_err: e.budget(),
            extrapolation_delta: e.estimate.extrapolation_delta,
            tail_bound: e.estimate.tail_bound,
        })
        .collect();
    out.csv("sweep.csv", &rows)?;
    let pairs = sweep.evenness();
    let even: Vec<EvenRow> = pairs
        .iter()
        .map(|p| EvenRow {
            p1: p.p[0],
            p2: p.p[1],
            sigma_plus: p.sigma_plus,
            sigma_minus: p.sigma_minus,
            difference: p.difference,
            budget: p.budget,
            holds: p.holds(),
        })
        .collect();
    out.csv("evenness.csv", &even)?;
    out.json("sweep.json", sweep)?;
    let s0 = sigma0(sweep.theta_hat);
    let summary = SweepSummary {
        directions: sweep.len(),
        theta_hat: sweep.theta_hat,
        big_theta_hat: sweep.big_theta_hat,
        sigma0: s0,
        min_sigma: sweep.sigmas().into_iter().fold(f64::INFINITY, f64::min),
        lower_bound_holds: sweep.entries.iter().all(|e| e.sigma() + e.budget() >= s0),
        evenness_pairs: pairs.len(),
        evenness_holds: pairs.iter().all(|p| p.holds()),
    };
    out.json("sweep_summary.json", &summary)?;
    Ok(summary)
}

fn sweep_lines(s: &SweepSummary) -> Vec<String> {
    vec![
        format!("{} directions, min sigma {:.6}, sigma0 {:.6}", s.directions, s.min_sigma, s.sigma0),
        format!("lower bound holds: {}", s.lower_bound_holds),
        format!("evenness holds on {} pairs: {}", s.evenness_pairs, s.evenness_holds),
    ]
}

pub fn sweep(cfg: &RunConfig, workers: usize, out: &mut Output) -> Result<Vec<String>, CliError> {
    let (_, sweep) = run_sweep(cfg, workers)?;
    Ok(sweep_lines(&write_sweep(&sweep, out)?))
}

#[derive(Serialize)]
struct ConvexityRow {
    theta_deg: f64,
    sigma: f64,
    sigma_err: f64,
    dsigma: f64,
    d2sigma: f64,
    hessian_gap: f64,
    b_probe: f64,
}

#[derive(Serialize)]
struct ConvexitySummary<'a> {
    sigma0: f64,
    min_gap: f64,
    min_gap_angle_deg: f64,
    noise_floor: f64,
    flagged_deg: &'a [f64],
    eta: f64,
    max_gap_deg: f64,
    inconclusive: bool,
    verdict: &'a str,
    b_probe_max_abs: f64,
    b_probe_noise_floor: f64,
    b_probe_verdict: &'a str,
}

pub fn convexity(cfg: &RunConfig, workers: usize, out: &mut Output) -> Result<Vec<String>, CliError> {
    let (_, sweep) = run_sweep(cfg, workers)?;
    let mut lines = sweep_lines(&write_sweep(&sweep, out)?);
    let r = convexity_report(&sweep, sweep.theta_hat).in_module("analyzer")?;
    let b = b_probe(&sweep).in_module("analyzer")?;
    let rows: Vec<ConvexityRow> = (0..r.angles_deg.len())
        .map(|k| ConvexityRow {
            theta_deg: r.angles_deg[k],
            sigma: r.sigma[k],
            sigma_err: r.sigma_err[k],
            dsigma: r.dsigma[k],
            d2sigma: r.d2sigma[k],
            hessian_gap: r.hessian_gap[k],
            b_probe: r.b_probe[k],
        })
        .collect();
    out.csv("convexity.csv", &rows)?;
    out.json(
        "convexity.json",
        &ConvexitySummary {
            sigma0: r.sigma0,
            min_gap: r.min_gap,
            min_gap_angle_deg: r.min_gap_angle_deg,
            noise_floor: r.noise_floor,
            flagged_deg: &r.flagged_deg,
            eta: r.eta,
            max_gap_deg: r.max_gap_deg,
            inconclusive: r.inconclusive,
            verdict: &r.verdict,
            b_probe_max_abs: b.max_abs,
            b_probe_noise_floor: b.noise_floor,
            b_probe_verdict: &b.verdict,
        },
    )?;
    lines.push(format!("convexity: {}", r.verdict));
    lines.push(format!("b-probe: {}", b.verdict));
    Ok(lines)
}

#[derive(Serialize)]
struct SlopeRow {
    m: u32,
    c_m: f64,
}

pub fn metric_slope(cfg: &RunConfig, out: &mut Output) -> Result<Vec<String>, CliError> {
    let field = field(cfg)?;
    let frame = need_p(cfg)?;
    let ms = &cfg.numerics.metric_slope;
    let s = metric_slope_c(&field, &frame, &ms.m, ms.delta).in_module("sigma")?;
    let rows: Vec<SlopeRow> = s.m.iter().zip(&s.c).map(|(&m, &c_m)| SlopeRow { m, c_m }).collect();
    out.csv("metric_slope.csv", &rows)?;
    out.json("metric_slope.json", &s)?;
    Ok(vec![
        format!("c_m = {:?}", s.c),
        format!(
            "c = {:.6} in [{:.6}, {:.6}]: {}; last spread {:.2e}",
            s.c_fit, s.lower, s.upper, s.in_bounds, s.spread
        ),
    ])
}

#[derive(Serialize)]
struct OracleRow {
    p: String,
    t: f64,
    delta: f64,
    bc: String,
    energy: f64,
    sigma_geodesic: f64,
    relative_difference: f64,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
    start: String,
}

pub fn oracle(cfg: &RunConfig, out: &mut Output) -> Result<Vec<String>, CliError> {
    let field = field(cfg)?;
    let frame = need_p(cfg)?;
    let o = &cfg.numerics.oracle;
    let cp = CellProblem::new(&field, &frame, o.t, o.delta, o.bc.into()).in_module("oracle")?;
    let res = minimize_cell_energy(&cp, &cfg.optimizer_options()).in_module("oracle")?;
    let geo = sigma_estimate(
        &field,
        &frame,
        &SigmaOptions {
            delta: o.delta,
            ..cfg.sigma_options()
        },
    )
    .in_module("sigma")?;
    let row = OracleRow {
        p: p_string(&frame.integer_vector().map(|p| p.to_vec())),
        t: o.t,
        delta: o.delta,
        bc: label(&cp.bc()),
        energy: res.energy_per_area,
        sigma_geodesic: geo.sigma_value,
        relative_difference: (geo.sigma_value - res.energy_per_area) / res.energy_per_area,
        iterations: res.iterations,
        grad_norm: res.grad_norm,
        converged: res.converged,
        start: label(&res.start),
    };
    out.csv("oracle.csv", std::slice::from_ref(&row))?;
    out.json("oracle.json", &row)?;
    if !res.converged {
        return Err(CliError::OracleStalled(format!(
            "gradient norm {:.3e} after {} iterations",
            res.grad_norm, res.iterations
        )));
    }
    Ok(vec![format!(
        "oracle energy {:.6} vs geodesic {:.6} (relative difference {:+.3}%), {} iterations",
        row.energy,
        row.sigma_geodesic,
        100.0 * row.relative_difference,
        row.iterations
    )])
}

#[derive(Serialize)]
struct Vertex {
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct WulffSummary {
    vertices: usize,
    active_halfplanes: usize,
    n_halfplanes: usize,
    convex: bool,
    inradius: f64,
    sigma0: f64,
    contains_sigma0_disk: bool,
}

pub fn wulff(cfg: &RunConfig, workers: usize, out: &mut Output) -> Result<Vec<String>, CliError> {
    let (_, sweep) = run_sweep(cfg, workers)?;
    let mut lines = sweep_lines(&write_sweep(&sweep, out)?);
    let poly = wulff_shape_2d(&sweep, cfg.numerics.sweep.n_halfplanes).in_module("analyzer")?;
    let mut verts: Vec<Vertex> = poly.vertices.iter().map(|v| Vertex { x: v[0], y: v[1] }).collect();
    if let Some(first) = poly.vertices.first() {
        verts.push(Vertex {
            x: first[0],
            y: first[1],
        });
    }
    out.csv("wulff.csv", &verts)?;
    let s0 = sigma0(sweep.theta_hat);
    let inradius = poly.inradius();
    let summary = WulffSummary {
        vertices: poly.vertices.len(),
        active_halfplanes: poly.active,
        n_halfplanes: poly.n_halfplanes,
        convex: poly.is_convex(),
        inradius,
        sigma0: s0,
        contains_sigma0_disk: inradius >= s0 - sweep.max_budget(),
    };
    out.json("wulff.json", &summary)?;
    lines.push(format!(
        "Wulff polygon: {} vertices, convex {}, inradius {:.6} (sigma0 {:.6})",
        summary.vertices, summary.convex, summary.inradius, s0
    ));
    Ok(lines)
}
