use crate::error::{Error, Result};
use crate::medium::{CoefficientField, DirectionFrame};

/// A Cartesian grid in the rotated frame `(s, t₁[, t₂])` with `s = x·ν`.
///
/// Rows sit at `s = i·ds` for `i ∈ [−n_half, n_half]`, so the plane `s = 0`
/// is a grid line and the outer rows lie exactly at `s = ±half_height`.
/// Lateral nodes sit at `t = origin + j·dt`. For rational directions the
/// lateral extent is a whole number of lattice periods and the grid wraps.
#[derive(Debug, Clone, PartialEq)]
pub struct StripGrid {
    frame: DirectionFrame,
    delta: f64,
    ds: f64,
    n_half: usize,
    dt: Vec<f64>,
    lateral_nodes: Vec<usize>,
    lateral_origin: Vec<f64>,
    periodic: bool,
}

fn check_delta(field: &CoefficientField, delta: f64) -> Result<()> {
    let min_period = field.period().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("grid spacing must be positive, got {delta}")));
    }
    if delta > min_period / 8.0 {
        return Err(Error::InvalidInput(format!(
            "grid too coarse: delta = {delta} exceeds period/8 = {}",
            min_period / 8.0
        )));
    }
    Ok(())
}

fn rows(half_height: f64, delta: f64) -> Result<(usize, f64)> {
    if !(half_height > 0.0 && half_height.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "half-height must be positive, got {half_height}"
        )));
    }
    let n = (half_height / delta - 1e-9).ceil().max(1.0) as usize;
    Ok((n, half_height / n as f64))
}

impl StripGrid {
    /// Periodic strip over `copies` lateral lattice periods of a rational direction.
    pub fn periodic(
        field: &CoefficientField,
        frame: &DirectionFrame,
        delta: f64,
        half_height: f64,
        copies: usize,
    ) -> Result<StripGrid> {
        check_delta(field, delta)?;
        if frame.dim() != field.dim() {
            return Err(Error::InvalidInput("frame and field dimensions differ".into()));
        }
        if !frame.is_rational() {
            return Err(Error::InvalidInput(
                "periodic strips need a rational direction; use a window".into(),
            ));
        }
        let scale = field.uniform_period().ok_or_else(|| {
            Error::Unsupported("rational strips need the same period on every axis".into())
        })?;
        if copies == 0 {
            return Err(Error::InvalidInput("lateral copies must be at least 1".into()));
        }
        let (n_half, ds) = rows(half_height, delta)?;
        let mut dt = Vec::new();
        let mut lateral_nodes = Vec::new();
        for &l in frame.lateral_periods() {
            // whole number of nodes per period so that copies align
            let per = (l * scale / delta - 1e-9).ceil() as usize;
            lateral_nodes.push(per * copies);
            dt.push(l * scale / per as f64);
        }
        Ok(StripGrid {
            frame: frame.clone(),
            delta,
            ds,
            n_half,
            lateral_origin: vec![0.0; dt.len()],
            dt,
            lateral_nodes,
            periodic: true,
        })
    }

    /// Non-periodic window `t ∈ [−width/2, width/2]` for arbitrary directions.
    pub fn window(
        field: &CoefficientField,
        frame: &DirectionFrame,
        delta: f64,
        half_height: f64,
        width: f64,
    ) -> Result<StripGrid> {
        check_delta(field, delta)?;
        if frame.dim() != field.dim() {
            return Err(Error::InvalidInput("frame and field dimensions differ".into()));
        }
        if !(width > 2.0 * delta) {
            return Err(Error::InvalidInput(format!("window width {width} too small")));
        }
        let (n_half, ds) = rows(half_height, delta)?;
        let lat = frame.dim() - 1;
        let n = (width / delta - 1e-9).ceil() as usize;
        let step = width / n as f64;
        Ok(StripGrid {
            frame: frame.clone(),
            delta,
            ds,
            n_half,
            dt: vec![step; lat],
            lateral_nodes: vec![n + 1; lat],
            lateral_origin: vec![-0.5 * width; lat],
            periodic: false,
        })
    }

    pub fn frame(&self) -> &DirectionFrame {
        &self.frame
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn dt(&self) -> &[f64] {
        &self.dt
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn half_height(&self) -> f64 {
        self.n_half as f64 * self.ds
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn lateral_nodes(&self) -> &[usize] {
        &self.lateral_nodes
    }

    /// Nodes per row.
    pub fn row_len(&self) -> usize {
        self.lateral_nodes.iter().product()
    }

    pub fn n_rows(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn len(&self) -> usize {
        self.n_rows() * self.row_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lateral measure represented by one row (cell widths summed).
    pub fn lateral_measure(&self) -> f64 {
        self.dt
            .iter()
            .zip(&self.lateral_nodes)
            .map(|(d, &n)| if self.periodic { d * n as f64 } else { d * (n - 1) as f64 })
            .product()
    }

    /// Lateral quadrature weight of a node (trapezoid at window walls).
    pub fn lateral_weight(&self, lateral_index: usize) -> f64 {
        let mut w = 1.0;
        let mut r = lateral_index;
        for (k, &n) in self.lateral_nodes.iter().enumerate() {
            let j = r % n;
            r /= n;
            let edge = !self.periodic && (j == 0 || j + 1 == n);
            w *= if edge { 0.5 * self.dt[k] } else { self.dt[k] };
        }
        w
    }

    /// `s` coordinate of storage row `r` (row `n_half` is the plane).
    #[inline]
    pub fn row_s(&self, r: usize) -> f64 {
        (r as f64 - self.n_half as f64) * self.ds
    }

    /// Local coordinates `(s, t…)` of node `idx`.
    pub fn local(&self, idx: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.frame.dim()];
        self.local_into(idx, &mut y);
        y
    }

    pub fn local_into(&self, idx: usize, y: &mut [f64]) {
        let row_len = self.row_len();
        y[0] = self.row_s(idx / row_len);
        let mut r = idx % row_len;
        for k in 0..self.lateral_nodes.len() {
            let n = self.lateral_nodes[k];
            y[k + 1] = self.lateral_origin[k] + (r % n) as f64 * self.dt[k];
            r /= n;
        }
    }

    pub fn world(&self, idx: usize) -> Vec<f64> {
        self.frame.to_world(&self.local(idx))
    }

    /// Samples `a` at every node.
    pub fn sample(&self, field: &CoefficientField) -> Vec<f64> {
        let dim = self.frame.dim();
        let mut y = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        (0..self.len())
            .map(|idx| {
                self.local_into(idx, &mut y);
                self.frame.to_world_into(&y, &mut x);
                field.eval(&x)
            })
            .collect()
    }

    /// The same grid geometry scaled by `1/m` and truncated to `n_half` rows per side.
    pub(crate) fn rescaled(&self, m: f64, n_half: usize) -> StripGrid {
        StripGrid {
            frame: self.frame.clone(),
            delta: self.delta / m,
            ds: self.ds / m,
            n_half,
            dt: self.dt.iter().map(|d| d / m).collect(),
            lateral_nodes: self.lateral_nodes.clone(),
            lateral_origin: self.lateral_origin.iter().map(|o| o / m).collect(),
            periodic: self.periodic,
        }
    }
}
