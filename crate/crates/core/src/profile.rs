//! One-dimensional transition profiles for the double well `W(u) = (1 − u²)²`.
//!
//! * `q(z) = tanh(√2 z)` solves `q′ = √2 √W(q)`, `q(0) = 0`.
//! * `q_T` solves `q_T′ = √2 √(W(q_T) + δ_T)`, `q_T(0) = 0`, and has the closed
//!   form `q_T(z) = tanh(F_T⁻¹(z))` with
//!   `F_T(ζ) = ∫₀^ζ sech²ξ / (√2 √(sech⁴ξ + δ_T)) dξ`.
//! * `ψ_T(z) = ∫₀^z dξ / (√2 √(W(ξ) + δ_T))` inverts `q_T` on `(−1, 1)`.
//! * `φ(z) = ∫₀^z √2 √W(ξ) dξ = √2 (z − z³/3)`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, gauss_legendre};

/// Absolute tolerance for every profile quadrature.
pub const QUAD_TOL: f64 = 1e-12;

/// Inversion clamp for `F_T⁻¹`; `tanh(20)` rounds to 1 in double precision.
pub const ZETA_MAX: f64 = 20.0;

/// Admissible overshoot past `|z| = 1` for [`psi_t`] when `δ_T > 0`.
pub const PSI_GUARD: f64 = 0.01;

#[inline]
pub fn w(u: f64) -> f64 {
    let s = 1.0 - u * u;
    s * s
}

#[inline]
pub fn dw(u: f64) -> f64 {
    -4.0 * u * (1.0 - u * u)
}

#[inline]
pub fn q(z: f64) -> f64 {
    (SQRT_2 * z).tanh()
}

#[inline]
pub fn q_prime(z: f64) -> f64 {
    SQRT_2 * sech(SQRT_2 * z).powi(2)
}

#[inline]
pub fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// `W(q(h)) = sech⁴(√2 h)`, the geodesic energy density factor.
#[inline]
pub fn sech4_sqrt2(h: f64) -> f64 {
    let s = sech(SQRT_2 * h);
    let s2 = s * s;
    s2 * s2
}

pub fn phi(z: f64) -> f64 {
    SQRT_2 * (z - z * z * z / 3.0)
}

/// Universal lower bound `σ₀(θ) = √(2θ) ∫₋₁¹ √W = (4/3) √(2θ)`.
pub fn sigma0(theta: f64) -> f64 {
    4.0 / 3.0 * (2.0 * theta).sqrt()
}

/// Parameters of the regularized profile `q_T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub t: f64,
    pub kappa: u32,
    pub delta_t: f64,
    pub zeta_max: f64,
    /// `F_T(zeta_max)`: beyond this `q_T` saturates.
    z_max: f64,
}

impl ProfileParams {
    /// `κ = max(4, ⌈5 √(2Θ̂)⌉)` and `δ_T = sech(T)^κ`.
    pub fn new(t: f64, big_theta_hat: f64) -> Result<ProfileParams> {
        if !(t > 0.0 && t.is_finite()) || !(big_theta_hat > 0.0) {
            return Err(Error::InvalidInput(format!(
                "profile needs T > 0 and Θ̂ > 0 (got T = {t}, Θ̂ = {big_theta_hat})"
            )));
        }
        let kappa = ((5.0 * (2.0 * big_theta_hat).sqrt()).ceil() as u32).max(4);
        Ok(Self::with_delta(t, kappa, sech(t).powi(kappa as i32)))
    }

    /// Explicit `δ_T`; `δ_T = 0` gives back the unregularized profile.
    pub fn with_delta(t: f64, kappa: u32, delta_t: f64) -> ProfileParams {
        let mut p = ProfileParams {
            t,
            kappa,
            delta_t,
            zeta_max: ZETA_MAX,
            z_max: 0.0,
        };
        p.z_max = integrate_f(0.0, ZETA_MAX, delta_t);
        p
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }
}

/// Integrand of `F_T`, written as `1 / (√2 √(1 + δ cosh⁴ξ))` to avoid `0/0` in the tails.
#[inline]
fn f_integrand(xi: f64, delta: f64) -> f64 {
    let c2 = xi.cosh().powi(2);
    1.0 / (SQRT_2 * (1.0 + delta * c2 * c2).sqrt())
}

fn integrate_f(a: f64, b: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return (b - a) / SQRT_2;
    }
    adaptive_simpson(|xi| f_integrand(xi, delta), a, b, QUAD_TOL)
}

pub fn f_t(zeta: f64, params: &ProfileParams) -> Result<f64> {
    if zeta.abs() > params.zeta_max {
        return Err(Error::Domain(format!(
            "F_T evaluated at |ζ| = {} beyond the clamp {}",
            zeta.abs(),
            params.zeta_max
        )));
    }
    Ok(zeta.signum() * integrate_f(0.0, zeta.abs(), params.delta_t))
}

/// `F_T⁻¹(z)` for `0 ≤ z < F_T(ζ_max)`, by bracketed Newton with bisection fallback.
/// Each step integrates only from the previous iterate.
fn f_t_inverse_pos(z: f64, params: &ProfileParams) -> f64 {
    let delta = params.delta_t;
    let (mut lo, mut hi) = (0.0, params.zeta_max);
    let mut zeta = (SQRT_2 * z).min(hi);
    let mut value = integrate_f(0.0, zeta, delta);
    for _ in 0..200 {
        let resid = value - z;
        if resid > 0.0 {
            hi = zeta;
        } else {
            lo = zeta;
        }
        if resid.abs() <= 1e-15 * z.max(1.0) || hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
        let mut next = zeta - resid / f_integrand(zeta, delta);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        value += integrate_f(zeta, next, delta);
        if (next - zeta).abs() <= 1e-14 * zeta.max(1.0) {
            zeta = next;
            break;
        }
        zeta = next;
    }
    zeta
}

/// `q_T(z) = tanh(F_T⁻¹(z))`. Past `F_T(ζ_max)` the value saturates at the
/// largest double below `±1`.
pub fn q_t(z: f64, params: &ProfileParams) -> f64 {
    let sat = 1.0 - f64::EPSILON / 2.0;
    if z.abs() >= params.z_max {
        return z.signum() * sat;
    }
    let v = z.signum() * f_t_inverse_pos(z.abs(), params).tanh();
    v.clamp(-sat, sat)
}

/// `q_T′(z) = √2 √(W(q_T(z)) + δ_T)` from the defining ODE.
pub fn q_t_prime(z: f64, params: &ProfileParams) -> f64 {
    SQRT_2 * (w(q_t(z, params)) + params.delta_t).sqrt()
}

pub fn psi_t(z: f64, params: &ProfileParams) -> Result<f64> {
    let delta = params.delta_t;
    if delta == 0.0 && z.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "ψ_T diverges at |z| = {} when δ_T = 0",
            z.abs()
        )));
    }
    if z.abs() > 1.0 + PSI_GUARD {
        return Err(Error::Domain(format!("ψ_T evaluated at |z| = {}", z.abs())));
    }
    let v = adaptive_simpson(
        |xi| 1.0 / (SQRT_2 * (w(xi) + delta).sqrt()),
        0.0,
        z.abs(),
        QUAD_TOL,
    );
    Ok(z.signum() * v)
}

/// Sandwich `q(z) ≤ q_T(z) ≤ q(√2 z)` for `z ≥ 0`, mirrored for `z < 0`.
///
/// Returns the smallest margin of the two inequalities (negative if violated).
pub fn sandwich_margin(z: f64, params: &ProfileParams) -> f64 {
    let a = z.abs();
    let v = q_t(a, params);
    (v - q(a)).min(q(SQRT_2 * a) - v)
}

/// `δ_T^{1/2} (e^{2√2 |z|} − 1)`, the bound on `|q_T(z) − q(z)|`.
pub fn qtq_bound(z: f64, params: &ProfileParams) -> f64 {
    params.delta_t.sqrt() * (2.0 * SQRT_2 * z.abs()).exp_m1()
}

/// Tabulated `q_T` for bulk evaluation on grids.
///
/// `F_T` is accumulated on a uniform ζ grid with a 5-point Gauss rule per
/// panel; `ζ(z)` is recovered by cubic Hermite interpolation using
/// `dζ/dz = 1/F_T′(ζ)`.
#[derive(Debug, Clone)]
pub struct QtTable {
    params: ProfileParams,
    zeta_step: f64,
    z_nodes: Vec<f64>,
}

impl QtTable {
    pub fn new(params: ProfileParams) -> QtTable {
        let panels = 20_000;
        let zeta_step = params.zeta_max / panels as f64;
        let (gx, gw) = gauss_legendre(5);
        let delta = params.delta_t;
        let mut z_nodes = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        z_nodes.push(0.0);
        for k in 0..panels {
            let c = (k as f64 + 0.5) * zeta_step;
            acc += gx
                .iter()
                .zip(&gw)
                .map(|(x, wt)| wt * f_integrand(c + 0.5 * zeta_step * x, delta))
                .sum::<f64>()
                * 0.5
                * zeta_step;
            z_nodes.push(acc);
        }
        QtTable {
            params,
            zeta_step,
            z_nodes,
        }
    }

    pub fn params(&self) -> &ProfileParams {
        &self.params
    }

    pub fn eval(&self, z: f64) -> f64 {
        let za = z.abs();
        let last = *self.z_nodes.last().unwrap();
        let sat = 1.0 - f64::EPSILON / 2.0;
        if za >= last {
            return z.signum() * sat;
        }
        let k = match self
            .z_nodes
            .binary_search_by(|v| v.total_cmp(&za))
        {
            Ok(k) => return z.signum() * (k as f64 * self.zeta_step).tanh(),
            Err(k) => k - 1,
        };
        let (z0, z1) = (self.z_nodes[k], self.z_nodes[k + 1]);
        let (x0, x1) = (k as f64 * self.zeta_step, (k + 1) as f64 * self.zeta_step);
        let delta = self.params.delta_t;
        let (d0, d1) = (1.0 / f_integrand(x0, delta), 1.0 / f_integrand(x1, delta));
        let h = z1 - z0;
        let t = (za - z0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let zeta = (2.0 * t3 - 3.0 * t2 + 1.0) * x0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * x1
            + (t3 - t2) * h * d1;
        (z.signum() * zeta.tanh()).clamp(-sat, sat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64) -> ProfileParams {
        ProfileParams::new(t, 1.0).unwrap()
    }

    #[test]
    fn wells() {
        assert_eq!(w(1.0), 0.0);
        assert_eq!(w(-1.0), 0.0);
        assert_eq!(w(0.0), 1.0);
    }

    #[test]
    fn dw_matches_finite_difference() {
        let (u, h) = (0.3, 1e-6);
        let fd = (w(u + h) - w(u - h)) / (2.0 * h);
        assert!((fd - dw(u)).abs() < 1e-8);
    }

    #[test]
    fn q_values() {
        assert_eq!(q(0.0), 0.0);
        // tanh(√2) from its exponential form
        let e = (2.0 * SQRT_2).exp();
        let oracle = (e - 1.0) / (e + 1.0);
        assert!((q(1.0) - oracle).abs() < 1e-15);
        assert!((q(1.0) - 0.888386).abs() < 1e-6);
        for k in -3..=3 {
            let z = k as f64;
            assert!((q_prime(z) - SQRT_2 * w(q(z)).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_choice() {
        for t in [3.0, 5.0, 8.0] {
            for big in [1.0, 1.5, 4.0] {
                let p = ProfileParams::new(t, big).unwrap();
                assert!(p.kappa >= 4);
                assert!(p.delta_t < 1.0);
                assert!(p.delta_t <= (2.0 * (-t).exp()).powi(p.kappa as i32));
            }
        }
        assert_eq!(ProfileParams::new(5.0, 1.0).unwrap().kappa, 8);
    }

    #[test]
    fn f_t_limits() {
        let p0 = ProfileParams::with_delta(5.0, 8, 0.0);
        assert!((f_t(2.0, &p0).unwrap() - SQRT_2).abs() < 1e-15);
        assert_eq!(f_t(0.0, &params(5.0)).unwrap(), 0.0);
        assert!(f_t(25.0, &params(5.0)).is_err());
        let p = params(5.0);
        assert!((f_t(-1.3, &p).unwrap() + f_t(1.3, &p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn f_t_is_increasing() {
        use rand::{Rng, SeedableRng};
        let p = params(3.0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let a: f64 = rng.gen_range(-20.0..20.0);
            let b: f64 = rng.gen_range(-20.0..20.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if hi - lo < 1e-9 {
                continue;
            }
            assert!(f_t(hi, &p).unwrap() > f_t(lo, &p).unwrap());
        }
    }

    #[test]
    fn q_t_examples() {
        let p = params(5.0);
        assert_eq!(q_t(0.0, &p), 0.0);
        for z in [0.1, 0.5, 1.0, 2.0] {
            let v = q_t(z, &p);
            assert!(q(z) <= v && v <= q(SQRT_2 * z), "sandwich at {z}");
        }
        let z = 1.0;
        let bound = p.delta_t.sqrt() * ((2.0 * SQRT_2 * z).exp() - 1.0);
        assert!((q_t(z, &p) - q(z)).abs() <= bound);
    }

    #[test]
    fn comparison_helpers() {
        let p = params(5.0);
        for z in [0.1, 0.5, 1.0, 2.0] {
            assert!(sandwich_margin(z, &p) >= 0.0);
            assert_eq!(sandwich_margin(-z, &p), sandwich_margin(z, &p));
            assert!((q_t(z, &p) - q(z)).abs() <= qtq_bound(z, &p));
        }
        assert_eq!(qtq_bound(0.0, &p), 0.0);
        // the unregularized profile sits on the lower edge
        let p0 = ProfileParams::with_delta(5.0, 8, 0.0);
        assert!(sandwich_margin(1.0, &p0).abs() < 1e-15);
    }

    #[test]
    fn q_t_is_odd_and_saturates() {
        let p = params(3.0);
        for z in [0.2, 1.1, 2.7] {
            assert_eq!(q_t(-z, &p), -q_t(z, &p));
        }
        let big = q_t(p.z_max() + 1.0, &p);
        assert!(big < 1.0 && big > 1.0 - 1e-15);
        assert_eq!(q_t(-p.z_max() - 1.0, &p), -big);
    }

    #[test]
    fn psi_t_examples() {
        let p = params(5.0);
        assert_eq!(psi_t(0.0, &p).unwrap(), 0.0);
        for z in [-2.0, -0.5, 0.5, 2.0] {
            let back = psi_t(q_t(z, &p), &p).unwrap();
            assert!((back - z).abs() < 1e-9, "round trip at {z}: {back}");
        }
        assert_eq!(psi_t(-0.4, &p).unwrap(), -psi_t(0.4, &p).unwrap());
        let p0 = ProfileParams::with_delta(5.0, 8, 0.0);
        assert!(psi_t(1.0, &p0).is_err());
        assert!(psi_t(1.5, &p).is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0), 0.0);
        assert!((phi(1.0) - 2.0 * SQRT_2 / 3.0).abs() < 1e-15);
        assert!((phi(1.0) - 0.942809).abs() < 1e-6);
        assert!((phi(1.0) - phi(-1.0) - sigma0(1.0)).abs() < 1e-15);
        assert!((sigma0(1.0) - 1.885618).abs() < 1e-6);
        // √2 ∫₋₁¹ √W by quadrature
        let quad = SQRT_2 * adaptive_simpson(|x| w(x).sqrt(), -1.0, 1.0, 1e-13);
        assert!((quad - sigma0(1.0)).abs() < 1e-12);
    }

    #[test]
    fn exponential_tails() {
        let p = params(5.0);
        for z in [2.0f64, 4.0, 8.0] {
            assert!((q(z) - 1.0).abs() <= 2.0 * (-2.0 * SQRT_2 * z).exp());
            assert!((q(-z) + 1.0).abs() <= 2.0 * (-2.0 * SQRT_2 * z).exp());
            assert!((q_t(z, &p) - 1.0).abs() <= 2.0 * (-SQRT_2 * z).exp());
            assert!((q_t(-z, &p) + 1.0).abs() <= 2.0 * (-SQRT_2 * z).exp());
        }
    }

    #[test]
    fn q_t_ode_residual() {
        let p = params(5.0);
        let h = 1e-3;
        for k in -30..=30 {
            let z = k as f64 * 0.1;
            let f = |x: f64| q_t(x, &p);
            let fd = (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h);
            let ode = SQRT_2 * (w(f(z)) + p.delta_t).sqrt();
            assert!((fd - ode).abs() < 1e-8, "z = {z}: {fd} vs {ode}");
        }
    }

    #[test]
    fn uniform_closeness_on_box() {
        for big in [1.0f64, 1.5] {
            let t = 5.0;
            let p = ProfileParams::new(t, big).unwrap();
            let half = big.sqrt() * t / 2.0;
            let bound = p.delta_t.sqrt() * (2.0 * SQRT_2 * half).exp();
            let worst = (0..=200)
                .map(|k| -half + 2.0 * half * k as f64 / 200.0)
                .map(|z| (q_t(z, &p) - q(z)).abs())
                .fold(0.0, f64::max);
            assert!(worst <= bound, "Θ = {big}: {worst} > {bound}");
        }
    }

    #[test]
    fn table_matches_direct_inversion() {
        for t in [3.0, 8.0] {
            let p = params(t);
            let table = QtTable::new(p);
            for k in -60..=60 {
                let z = k as f64 * 0.07;
                assert!((table.eval(z) - q_t(z, &p)).abs() < 1e-12, "z = {z}");
            }
        }
    }
}
