//! Homogenized anisotropic surface tension of periodic bistable media.
//!
//! The surface tension `σ(ν)` of the Ginzburg–Landau energy
//! `∫ a(x) W(u) + ½|∇u|²` with a periodic coefficient `a` is evaluated through
//! the signed geodesic distance `h_ν` to the plane `{x·ν = 0}` in the conformal
//! metric `√a`:
//!
//! ```text
//! σ(ν) = lim  T^{1−N} ∫_{TQ_ν} 2 a(y) sech⁴(√2 h_ν(y)) dy
//! ```
//!
//! and cross-checked against direct minimization of the cell energy.

pub mod analyzer;
pub mod eikonal;
pub mod error;
pub mod medium;
pub mod oracle;
pub mod profile;
pub mod quad;
pub mod sigma;

pub use error::{Error, Result};
