//! Direction frames: the unit normal ν, a rotation taking ν to e₁, and for
//! rational directions an orthogonal set of lateral lattice translations.

use crate::error::{Error, Result};

/// How a direction was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionInput {
    /// Integer lattice vector; reduced by its gcd.
    Integer(Vec<i64>),
    /// Arbitrary nonzero real vector; treated as irrational.
    Real(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFrame {
    nu: Vec<f64>,
    /// Rows are ν followed by the unit lateral vectors, so `R ν = e₁`.
    rotation: Vec<Vec<f64>>,
    integer_vector: Option<Vec<i64>>,
    lateral_lattice: Vec<Vec<i64>>,
    lateral_periods: Vec<f64>,
}

pub fn direction_frame(input: &DirectionInput) -> Result<DirectionFrame> {
    match input {
        DirectionInput::Integer(p) => DirectionFrame::rational(p),
        DirectionInput::Real(v) => DirectionFrame::from_vector(v),
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn reduce(p: &[i64]) -> Vec<i64> {
    let g = p.iter().fold(0, |g, &c| gcd(g, c));
    p.iter().map(|&c| c / g).collect()
}

fn norm_i(p: &[i64]) -> f64 {
    p.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter().map(|c| c / n).collect()
}

fn cross_i(a: &[i64], b: &[i64]) -> Vec<i64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Shortest nonzero integer vector orthogonal to `p` (3D).
fn shortest_orthogonal(p: &[i64]) -> Vec<i64> {
    let bound = norm_i(p).ceil() as i64;
    let mut best: Option<(i64, Vec<i64>)> = None;
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                if (a, b, c) == (0, 0, 0) || a * p[0] + b * p[1] + c * p[2] != 0 {
                    continue;
                }
                let len2 = a * a + b * b + c * c;
                let m = vec![a, b, c];
                let better = match &best {
                    None => true,
                    // lexicographic tie-break keeps the choice deterministic
                    Some((l, bm)) => len2 < *l || (len2 == *l && m > *bm),
                };
                if better {
                    best = Some((len2, m));
                }
            }
        }
    }
    best.expect("an orthogonal integer vector always exists").1
}

impl DirectionFrame {
    /// Frame of a rational direction `p / |p|`.
    pub fn rational(p: &[i64]) -> Result<DirectionFrame> {
        check_dim(p.len())?;
        if p.iter().all(|&c| c == 0) {
            return Err(Error::InvalidInput("direction vector is zero".into()));
        }
        let p = reduce(p);
        let nu: Vec<f64> = p.iter().map(|&c| c as f64 / norm_i(&p)).collect();
        let lateral_lattice = match p.len() {
            2 => vec![vec![-p[1], p[0]]],
            _ => {
                let m1 = shortest_orthogonal(&p);
                let m2 = reduce(&cross_i(&p, &m1));
                vec![m1, m2]
            }
        };
        let mut rotation = vec![nu.clone()];
        for m in &lateral_lattice {
            let n = norm_i(m);
            rotation.push(m.iter().map(|&c| c as f64 / n).collect());
        }
        let lateral_periods = lateral_lattice.iter().map(|m| norm_i(m)).collect();
        Ok(DirectionFrame {
            nu,
            rotation,
            integer_vector: Some(p),
            lateral_lattice,
            lateral_periods,
        })
    }

    /// Frame of an arbitrary direction, without lattice structure.
    pub fn from_vector(v: &[f64]) -> Result<DirectionFrame> {
        check_dim(v.len())?;
        if !v.iter().all(|c| c.is_finite()) || v.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidInput(
                "direction vector must be finite and nonzero".into(),
            ));
        }
        let nu = normalized(v);
        let rotation = match nu.len() {
            2 => vec![nu.clone(), vec![-nu[1], nu[0]]],
            _ => {
                let k = (0..3)
                    .min_by(|&i, &j| nu[i].abs().total_cmp(&nu[j].abs()))
                    .unwrap();
                let mut e = vec![0.0; 3];
                e[k] = 1.0;
                let proj = nu[k];
                let t1 = normalized(&[e[0] - proj * nu[0], e[1] - proj * nu[1], e[2] - proj * nu[2]]);
                let t2 = cross(&nu, &t1);
                vec![nu.clone(), t1, t2]
            }
        };
        Ok(DirectionFrame {
            nu,
            rotation,
            integer_vector: None,
            lateral_lattice: Vec::new(),
            lateral_periods: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn rotation(&self) -> &[Vec<f64>] {
        &self.rotation
    }

    pub fn integer_vector(&self) -> Option<&[i64]> {
        self.integer_vector.as_deref()
    }

    pub fn is_rational(&self) -> bool {
        self.integer_vector.is_some()
    }

    /// Integer lateral translations (orthogonal to ν and to each other).
    pub fn lateral_lattice(&self) -> &[Vec<i64>] {
        &self.lateral_lattice
    }

    /// Lengths of the lateral lattice translations on the unit lattice.
    pub fn lateral_periods(&self) -> &[f64] {
        &self.lateral_periods
    }

    /// First lateral period (the only one in 2D).
    pub fn lateral_period(&self) -> Option<f64> {
        self.lateral_periods.first().copied()
    }

    /// Unit lateral vector `k` (row `k + 1` of the rotation).
    pub fn lateral_unit(&self, k: usize) -> &[f64] {
        &self.rotation[k + 1]
    }

    /// Frame of the opposite direction −ν.
    pub fn reversed(&self) -> DirectionFrame {
        match &self.integer_vector {
            Some(p) => {
                let q: Vec<i64> = p.iter().map(|c| -c).collect();
                DirectionFrame::rational(&q).expect("negated nonzero vector")
            }
            None => {
                let v: Vec<f64> = self.nu.iter().map(|c| -c).collect();
                DirectionFrame::from_vector(&v).expect("negated nonzero vector")
            }
        }
    }

    /// Local coordinates `R x`: component 0 is `x·ν`.
    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        self.rotation
            .iter()
            .map(|row| row.iter().zip(x).map(|(r, c)| r * c).sum())
            .collect()
    }

    /// World coordinates `Rᵀ y`.
    pub fn to_world(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        self.to_world_into(y, &mut x);
        x
    }

    pub fn to_world_into(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|c| *c = 0.0);
        for (row, &yk) in self.rotation.iter().zip(y) {
            for (xc, r) in x.iter_mut().zip(row) {
                *xc += r * yk;
            }
        }
    }

    /// Angle of ν in `[0, 2π)` (2D only).
    pub fn angle(&self) -> f64 {
        let a = self.nu[1].atan2(self.nu[0]);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "direction must have 2 or 3 components, got {n}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orthonormal_residual(f: &DirectionFrame) -> f64 {
        let r = f.rotation();
        let n = f.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| r[k][i] * r[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    fn det(r: &[Vec<f64>]) -> f64 {
        if r.len() == 2 {
            r[0][0] * r[1][1] - r[0][1] * r[1][0]
        } else {
            let c = cross(&r[1], &r[2]);
            r[0].iter().zip(&c).map(|(a, b)| a * b).sum()
        }
    }

    #[test]
    fn axis_direction() {
        let f = DirectionFrame::rational(&[1, 0]).unwrap();
        assert_eq!(f.nu(), &[1.0, 0.0]);
        assert_eq!(f.rotation(), &[vec![1.0, 0.0], vec![-0.0, 1.0]]);
        assert_eq!(f.lateral_period(), Some(1.0));
    }

    #[test]
    fn gcd_reduction() {
        let f = DirectionFrame::rational(&[2, 4]).unwrap();
        assert_eq!(f.integer_vector(), Some(&[1i64, 2][..]));
        let s5 = 5f64.sqrt();
        assert!((f.nu()[0] - 1.0 / s5).abs() < 1e-15);
        assert!((f.nu()[1] - 2.0 / s5).abs() < 1e-15);
        assert!((f.lateral_period().unwrap() - s5).abs() < 1e-15);
        assert_eq!(f.lateral_lattice(), &[vec![-2, 1]]);
    }

    #[test]
    fn irrational_branch() {
        let f = DirectionFrame::from_vector(&[1f64.cos(), 1f64.sin()]).unwrap();
        assert!(f.integer_vector().is_none());
        assert!(f.lateral_period().is_none());
        assert!((f.angle() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(DirectionFrame::rational(&[0, 0]).is_err());
        assert!(DirectionFrame::from_vector(&[0.0, 0.0, 0.0]).is_err());
        assert!(DirectionFrame::rational(&[1]).is_err());
    }

    #[test]
    fn rational_3d_lattice_is_orthogonal() {
        for p in [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 2, 2], [2, 3, 5]] {
            let f = DirectionFrame::rational(&p).unwrap();
            let lat = f.lateral_lattice();
            let dot = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();
            assert_eq!(dot(&lat[0], &p), 0);
            assert_eq!(dot(&lat[1], &p), 0);
            assert_eq!(dot(&lat[0], &lat[1]), 0);
            assert!(orthonormal_residual(&f) < 1e-12);
            assert!((det(f.rotation()) - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn rotation_invariants_2d(p1 in -40i64..40, p2 in -40i64..40) {
            prop_assume!(p1 != 0 || p2 != 0);
            let f = DirectionFrame::rational(&[p1, p2]).unwrap();
            let n: f64 = f.nu().iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-14);
            prop_assert!(orthonormal_residual(&f) < 1e-12);
            prop_assert!((det(f.rotation()) - 1.0).abs() < 1e-12);
            let rn = f.to_local(f.nu());
            prop_assert!((rn[0] - 1.0).abs() < 1e-12 && rn[1].abs() < 1e-12);
            let q = f.integer_vector().unwrap();
            let len = ((q[0] * q[0] + q[1] * q[1]) as f64).sqrt();
            prop_assert!((f.lateral_period().unwrap() - len).abs() < 1e-12);
        }

        #[test]
        fn rotation_invariants_3d(v in prop::array::uniform3(-1.0f64..1.0)) {
            prop_assume!(v.iter().map(|c| c * c).sum::<f64>() > 1e-6);
            let f = DirectionFrame::from_vector(&v).unwrap();
            prop_assert!(orthonormal_residual(&f) < 1e-12);
            prop_assert!((det(f.rotation()) - 1.0).abs() < 1e-12);
            let rn = f.to_local(f.nu());
            prop_assert!((rn[0] - 1.0).abs() < 1e-12);
            prop_assert!(rn[1].abs() < 1e-12 && rn[2].abs() < 1e-12);
            let back = f.to_world(&f.to_local(&v));
            for k in 0..3 { prop_assert!((back[k] - v[k]).abs() < 1e-12); }
        }
    }
}
