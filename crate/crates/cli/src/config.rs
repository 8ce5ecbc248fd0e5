//! JSON run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use geosigma::oracle::{BoundaryCondition, OptimizerOptions};
use geosigma::sigma::{ProfileKind, SigmaOptions, DEFAULT_EPS_TAIL, DEFAULT_T_MULTIPLIERS};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumConfig,
    #[serde(default)]
    pub direction: DirectionConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub expr: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    2
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionConfig {
    /// Integer lattice vector.
    pub p: Option<Vec<i64>>,
    /// Angles of `ν` in degrees (2D), treated as irrational.
    pub angles_deg: Option<Vec<f64>>,
    pub farey_max_denominator: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileChoice {
    Exact,
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BcChoice {
    Step,
    Profile,
}

impl From<BcChoice> for BoundaryCondition {
    fn from(b: BcChoice) -> Self {
        match b {
            BcChoice::Step => BoundaryCondition::MollifiedStep,
            BcChoice::Profile => BoundaryCondition::ProfileTrace,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub delta: f64,
    pub eps_tail: f64,
    pub t_multipliers: Vec<f64>,
    pub profile: ProfileChoice,
    pub refine: bool,
    pub sweep: SweepConfig,
    pub oracle: OracleConfig,
    pub metric_slope: MetricSlopeConfig,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            delta: 1.0 / 64.0,
            eps_tail: DEFAULT_EPS_TAIL,
            t_multipliers: DEFAULT_T_MULTIPLIERS.to_vec(),
            profile: ProfileChoice::Exact,
            refine: true,
            sweep: SweepConfig::default(),
            oracle: OracleConfig::default(),
            metric_slope: MetricSlopeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub refine_levels: usize,
    pub refine_max_denominator: u32,
    pub n_halfplanes: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            refine_levels: 1,
            refine_max_denominator: 16,
            n_halfplanes: 360,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub t: f64,
    pub delta: f64,
    pub bc: BcChoice,
    pub max_iter: usize,
    pub grad_tol: Option<f64>,
    pub two_starts: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            t: 8.0,
            delta: 1.0 / 32.0,
            bc: BcChoice::Profile,
            max_iter: 50_000,
            grad_tol: None,
            two_starts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSlopeConfig {
    pub m: Vec<u32>,
    pub delta: f64,
}

impl Default for MetricSlopeConfig {
    fn default() -> Self {
        MetricSlopeConfig {
            m: vec![1, 2, 4, 8],
            delta: 1.0 / 32.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("geosigma-out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Extracts the field name from serde's "missing field `x`" message.
fn missing_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("missing field `")?;
    rest.split('`').next()
}

/// Parses a config, reporting errors against dotted key paths.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.inner().to_string();
        let key = match (missing_field(&msg), path.as_str()) {
            (Some(f), ".") => f.to_string(),
            (Some(f), p) => format!("{p}.{f}"),
            (None, p) => p.to_string(),
        };
        CliError::Config { key, message: msg }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn bad(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be a positive number, got {v}")))
    }
}

impl RunConfig {
    /// Config with defaults for everything but the medium.
    pub fn from_expr(expr: &str) -> RunConfig {
        RunConfig {
            medium: MediumConfig {
                expr: expr.to_string(),
                dim: 2,
            },
            direction: DirectionConfig::default(),
            numerics: NumericsConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.medium.expr.trim().is_empty() {
            return Err(bad("medium.expr", "must not be empty"));
        }
        if !(2..=3).contains(&self.medium.dim) {
            return Err(bad("medium.dim", format!("must be 2 or 3, got {}", self.medium.dim)));
        }
        if let Some(p) = &self.direction.p {
            if p.len() != self.medium.dim || p.iter().all(|&c| c == 0) {
                return Err(bad("direction.p", "must be a nonzero vector matching medium.dim"));
            }
        }
        if let Some(a) = &self.direction.angles_deg {
            if a.is_empty() || a.iter().any(|x| !x.is_finite()) {
                return Err(bad("direction.angles_deg", "must list finite angles"));
            }
        }
        if self.direction.farey_max_denominator == Some(0) {
            return Err(bad("direction.farey_max_denominator", "must be positive"));
        }
        let n = &self.numerics;
        positive("numerics.delta", n.delta)?;
        positive("numerics.eps_tail", n.eps_tail)?;
        if n.eps_tail >= 1.0 {
            return Err(bad("numerics.eps_tail", "must be below 1"));
        }
        if n.t_multipliers.is_empty() {
            return Err(bad("numerics.t_multipliers", "must not be empty"));
        }
        for (i, &m) in n.t_multipliers.iter().enumerate() {
            positive(&format!("numerics.t_multipliers[{i}]"), m)?;
        }
        if n.sweep.refine_max_denominator == 0 {
            return Err(bad("numerics.sweep.refine_max_denominator", "must be positive"));
        }
        if n.sweep.n_halfplanes < 8 {
            return Err(bad("numerics.sweep.n_halfplanes", "must be at least 8"));
        }
        positive("numerics.oracle.t", n.oracle.t)?;
        positive("numerics.oracle.delta", n.oracle.delta)?;
        if n.oracle.max_iter == 0 {
            return Err(bad("numerics.oracle.max_iter", "must be positive"));
        }
        if let Some(g) = n.oracle.grad_tol {
            positive("numerics.oracle.grad_tol", g)?;
        }
        positive("numerics.metric_slope.delta", n.metric_slope.delta)?;
        let m = &n.metric_slope.m;
        if m.is_empty() || m.contains(&0) || m.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("numerics.metric_slope.m", "must be positive and strictly ascending"));
        }
        if self.output.formats.is_empty() {
            return Err(bad("output.formats", "must name at least one format"));
        }
        Ok(())
    }

    pub fn sigma_options(&self) -> SigmaOptions {
        let n = &self.numerics;
        SigmaOptions {
            delta: n.delta,
            eps_tail: n.eps_tail,
            t_multipliers: n.t_multipliers.clone(),
            profile: match n.profile {
                ProfileChoice::Exact => ProfileKind::ExactQ,
                ProfileChoice::Regularized => ProfileKind::QT,
            },
            refine: n.refine,
        }
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        let o = &self.numerics.oracle;
        OptimizerOptions {
            max_iter: o.max_iter,
            grad_tol: o.grad_tol,
            two_starts: o.two_starts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(text: &str) -> String {
        match parse_config(text) {
            Err(CliError::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config(r#"{"medium": {"expr": "1"}}"#).unwrap();
        assert_eq!(c.medium.dim, 2);
        assert_eq!(c.numerics.delta, 1.0 / 64.0);
        assert_eq!(c.numerics.oracle.bc, BcChoice::Profile);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(r#"{"medium": {}}"#), "medium.expr");
        assert_eq!(key_of(r#"{}"#), "medium");
        assert_eq!(key_of(r#"{"medium": {"expr": "1", "colour": 2}}"#), "medium.colour");
        assert_eq!(key_of(r#"{"medium": {"expr": "1"}, "numerics": {"delta": -1}}"#), "numerics.delta");
        assert_eq!(
            key_of(r#"{"medium": {"expr": "1"}, "numerics": {"oracle": {"bc": "dirichlet"}}}"#),
            "numerics.oracle.bc"
        );
        assert_eq!(
            key_of(r#"{"medium": {"expr": "1"}, "numerics": {"t_multipliers": [4, 0]}}"#),
            "numerics.t_multipliers[1]"
        );
        assert_eq!(key_of(r#"{"medium": {"expr": "1"}, "direction": {"p": [0, 0]}}"#), "direction.p");
    }
}
