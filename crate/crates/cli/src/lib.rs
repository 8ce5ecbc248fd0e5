//! Command-line front end: JSON configuration, command dispatch and
//! deterministic output files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{parse_config, BcChoice, RunConfig};
use error::CliError;
use output::Output;
use selftest::Suite;

#[derive(Debug, Parser)]
#[command(name = "geosigma", version, about = "Homogenized surface tension of periodic bistable media")]
pub struct Cli {
    /// Threads used by direction sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// σ(ν) for the configured direction(s).
    Sigma(Source),
    /// σ over the Farey directions.
    Sweep(Source),
    /// Angular derivatives, Hessian gap and σ′ probe over a sweep.
    Convexity(Source),
    /// Large-scale slope of the distance function.
    MetricSlope(Source),
    /// Direct minimization of the cell energy.
    Oracle(OracleArgs),
    /// Wulff polygon from a sweep.
    Wulff(Source),
    /// Invariant battery on small grids.
    Selftest {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
    },
}

#[derive(Debug, Args)]
pub struct Source {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coefficient expression; replaces `medium.expr`.
    #[arg(long)]
    pub expr: Option<String>,
    /// Integer direction, e.g. `1,2`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub p: Option<Vec<i64>>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Farey bound for sweeps.
    #[arg(long)]
    pub farey: Option<u32>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: Source,
    /// Cube side.
    #[arg(long = "T", alias = "t")]
    pub t: Option<f64>,
    #[arg(long, value_enum)]
    pub bc: Option<BcChoice>,
}

fn load(src: &Source) -> Result<RunConfig, CliError> {
    let mut cfg = match (&src.config, &src.expr) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config {
                key: "config".into(),
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            parse_config(&text)?
        }
        (None, Some(expr)) => RunConfig::from_expr(expr),
        (None, None) => {
            return Err(CliError::Config {
                key: "medium.expr".into(),
                message: "missing: pass --config or --expr".into(),
            })
        }
    };
    if let (Some(_), Some(expr)) = (&src.config, &src.expr) {
        cfg.medium.expr = expr.clone();
    }
    if let Some(p) = &src.p {
        cfg.direction.p = Some(p.clone());
    }
    if let Some(d) = src.delta {
        cfg.numerics.delta = d;
        cfg.numerics.metric_slope.delta = d;
    }
    if let Some(q) = src.farey {
        cfg.direction.farey_max_denominator = Some(q);
    }
    if let Some(o) = &src.out {
        cfg.output.directory = o.clone();
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    command: &'a str,
    exit_code: i32,
    error: String,
}

fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let (name, cfg) = match &cli.command {
        Command::Selftest { suite } => {
            let outcomes = selftest::run(*suite);
            let mut lines: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    format!(
                        "{}  {:<9} {:<36} {}",
                        if o.passed { "PASS" } else { "FAIL" },
                        format!("{:?}", o.suite).to_lowercase(),
                        o.name,
                        o.detail
                    )
                })
                .collect();
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            lines.push(format!("{} checks, {failed} failed", outcomes.len()));
            if failed > 0 {
                for l in &lines {
                    println!("{l}");
                }
                return Err(CliError::Config {
                    key: "selftest".into(),
                    message: format!("{failed} check(s) failed"),
                });
            }
            return Ok(lines);
        }
        Command::Oracle(a) => {
            let mut cfg = load(&a.source)?;
            if let Some(d) = a.source.delta {
                cfg.numerics.oracle.delta = d;
            }
            if let Some(t) = a.t {
                cfg.numerics.oracle.t = t;
            }
            if let Some(bc) = a.bc {
                cfg.numerics.oracle.bc = bc;
            }
            ("oracle", cfg)
        }
        Command::Sigma(s) => ("sigma", load(s)?),
        Command::Sweep(s) => ("sweep", load(s)?),
        Command::Convexity(s) => ("convexity", load(s)?),
        Command::MetricSlope(s) => ("metric-slope", load(s)?),
        Command::Wulff(s) => ("wulff", load(s)?),
    };
    cfg.validate()?;
    if cli.workers == 0 {
        return Err(CliError::Config {
            key: "workers".into(),
            message: "must be positive".into(),
        });
    }
    let mut out = Output::new(&cfg.output)?;
    out.run_record(name, cli.workers, &cfg)?;
    let result = match &cli.command {
        Command::Sigma(_) => commands::sigma(&cfg, &mut out),
        Command::Sweep(_) => commands::sweep(&cfg, cli.workers, &mut out),
        Command::Convexity(_) => commands::convexity(&cfg, cli.workers, &mut out),
        Command::MetricSlope(_) => commands::metric_slope(&cfg, &mut out),
        Command::Oracle(_) => commands::oracle(&cfg, &mut out),
        Command::Wulff(_) => commands::wulff(&cfg, cli.workers, &mut out),
        Command::Selftest { .. } => unreachable!("handled above"),
    };
    match result {
        Err(e) if e.exit_code() == 3 => {
            out.write_json(
                "diagnostics.json",
                &Diagnostics {
                    command: name,
                    exit_code: 3,
                    error: e.to_string(),
                },
            )?;
            Err(e)
        }
        Ok(mut lines) => {
            lines.push(format!("outputs in {}", out.dir().display()));
            Ok(lines)
        }
        other => other,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
