//! Level-set form `σ = L⁻¹ ∫ [∫_{h=s} 2√a dH¹] sech⁴(√2 s) ds` (2D).

use crate::eikonal::DistanceField;
use crate::error::{Error, Result};
use crate::medium::CoefficientField;
use crate::profile::sech4_sqrt2;
use crate::quad::gauss_legendre;

/// Gauss order per level panel.
const LEVEL_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct CoareaSigma {
    pub value: f64,
    pub levels: usize,
    /// Levels where no contour was found; their weight is redistributed.
    pub skipped: usize,
}

/// Contours `{h = s}` by linear interpolation on the two triangles of each
/// cell, at Gauss levels over `[−T/2, T/2]`. `n_levels` is rounded up to a
/// multiple of 8.
pub fn coarea_sigma_at_t(
    field: &CoefficientField,
    df: &DistanceField,
    t: f64,
    n_levels: usize,
) -> Result<CoareaSigma> {
    let g = df.grid();
    if g.frame().dim() != 2 {
        return Err(Error::Unsupported("coarea contouring is 2D only".into()));
    }
    if !(t > 0.0) || t / 2.0 > g.half_height() * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "T/2 = {} exceeds the solved half-height {}",
            t / 2.0,
            g.half_height()
        )));
    }
    if n_levels == 0 {
        return Err(Error::InvalidInput("n_levels must be positive".into()));
    }
    let panels = n_levels.div_ceil(LEVEL_ORDER);
    let (gx, gw) = gauss_legendre(LEVEL_ORDER);
    let width = t / panels as f64;

    let row_len = g.row_len();
    let n_rows = g.n_rows();
    let h = df.h();
    let cells = if g.is_periodic() { row_len } else { row_len - 1 };
    // per cell-row value range for pruning
    let ranges: Vec<(f64, f64)> = (0..n_rows - 1)
        .map(|r| {
            h[r * row_len..(r + 2) * row_len]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
        .collect();
    let frame = g.frame();
    let (ds, dt) = (g.ds(), g.dt()[0]);
    let t0 = g.local(0)[1];

    let mut total = 0.0;
    let (mut used_w, mut all_w) = (0.0, 0.0);
    let mut skipped = 0;
    let mut levels = 0;
    let mut x = [0.0; 2];
    for p in 0..panels {
        let c = -t / 2.0 + (p as f64 + 0.5) * width;
        for (xi, wi) in gx.iter().zip(&gw) {
            let s = c + 0.5 * width * xi;
            let weight = 0.5 * width * wi * sech4_sqrt2(s);
            levels += 1;
            all_w += weight;
            let mut length = 0.0;
            let mut found = false;
            for (r, &(lo, hi)) in ranges.iter().enumerate() {
                if s < lo || s > hi {
                    continue;
                }
                let s_lo = g.row_s(r);
                for j in 0..cells {
                    let j1 = (j + 1) % row_len;
                    let tj = t0 + j as f64 * dt;
                    let v00 = h[r * row_len + j];
                    let v01 = h[r * row_len + j1];
                    let v10 = h[(r + 1) * row_len + j];
                    let v11 = h[(r + 1) * row_len + j1];
                    let p00 = [s_lo, tj];
                    let p01 = [s_lo, tj + dt];
                    let p10 = [s_lo + ds, tj];
                    let p11 = [s_lo + ds, tj + dt];
                    for tri in [[(p00, v00), (p10, v10), (p11, v11)], [(p00, v00), (p11, v11), (p01, v01)]] {
                        if let Some((a, b)) = triangle_segment(&tri, s) {
                            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                            if len == 0.0 {
                                continue;
                            }
                            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                            frame.to_world_into(&mid, &mut x);
                            length += 2.0 * field.eval(&x).sqrt() * len;
                            found = true;
                        }
                    }
                }
            }
            if found {
                used_w += weight;
                total += weight * length;
            } else {
                skipped += 1;
            }
        }
    }
    if used_w == 0.0 {
        return Err(Error::InvalidInput("no level set could be contoured".into()));
    }
    Ok(CoareaSigma {
        value: total * (all_w / used_w) / g.lateral_measure(),
        levels,
        skipped,
    })
}

type Vertex = ([f64; 2], f64);

/// Segment of `{v = s}` inside a triangle with linear data, if any.
fn triangle_segment(tri: &[Vertex; 3], s: f64) -> Option<([f64; 2], [f64; 2])> {
    let above: Vec<bool> = tri.iter().map(|(_, v)| *v >= s).collect();
    let mut pts = Vec::with_capacity(2);
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        if above[i] != above[j] {
            let ((pi, vi), (pj, vj)) = (tri[i], tri[j]);
            let lam = (s - vi) / (vj - vi);
            pts.push([pi[0] + lam * (pj[0] - pi[0]), pi[1] + lam * (pj[1] - pi[1])]);
        }
    }
    (pts.len() == 2).then(|| (pts[0], pts[1]))
}
