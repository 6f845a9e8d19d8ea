//! `ybe-forge`: runs the identity suites, prints face-weight tables and
//! convergence studies.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on a
//! configuration error.

mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ybe_core::converge::{converge, ConvergeParams, ConvergeTarget};
use ybe_core::qspecial::{TruncationPolicy, C64};
use ybe_core::rmat::{admissible_faces, boltzmann_weight};
use ybe_core::suites::run_suites;

use crate::config::{parse_complex, ConfigError, Format, Settings};
use crate::output::{write_reports, write_study, write_weights, WeightRow};

/// Environment variable capping the worker threads of `check`.
const THREADS_ENV: &str = "YBE_FORGE_THREADS";

#[derive(Parser)]
#[command(name = "ybe-forge", version, about = "Residual checks for Yang-Baxter type identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run identity suites and emit one report per check and parameter point.
    Check(CheckArgs),
    /// Tabulate admissible face weights over a height window.
    Weights(WeightsArgs),
    /// Residual of a truncated product against its closed form as the order grows.
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Suite name, or `all`.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random parameter points per suite.
    #[arg(long)]
    samples: Option<usize>,
    /// Tolerance applied to every check.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Number of factors in truncated products.
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// File of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time per report (output is then not byte-reproducible).
    #[arg(long)]
    timing: bool,
    /// Extra `key=value` setting, such as `q=0.2..0.3`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct WeightsArgs {
    /// Spectral ratio, `re` or `re,im`.
    #[arg(long, default_value = "0.5")]
    z: String,
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    /// Base dynamical parameter `w0`; height `l` reads `R^IRF` at `w0 q^l`.
    #[arg(long, default_value_t = 0.9)]
    w: f64,
    #[arg(long, default_value_t = 0.4)]
    q: f64,
    /// Lowest base height.
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    lo: i64,
    /// Highest base height.
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    hi: i64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// One of twist, m_plus, m_minus, r6v_universal.
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Spectral ratio `z1/z2`, `re` or `re,im`.
    #[arg(long, default_value = "0.5")]
    z: String,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0.8)]
    w: f64,
    #[arg(long, default_value_t = 0.4)]
    q: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output: {0}")]
    Io(#[from] io::Error),
    #[error("evaluation: {0}")]
    Eval(#[from] ybe_core::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Weights(a) => cmd_weights(a),
        Command::Converge(a) => cmd_converge(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn open_out(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_settings(a: &CheckArgs) -> Result<Settings, ConfigError> {
    let mut s = match &a.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    for p in &a.params {
        s.assign(p)?;
    }
    s.set("suite", a.suite.clone())?;
    s.set("seed", a.seed.map(|v| v.to_string()))?;
    s.set("samples", a.samples.map(|v| v.to_string()))?;
    s.set("tolerance", a.tolerance.map(|v| v.to_string()))?;
    s.set("trunc", a.trunc.map(|v| v.to_string()))?;
    s.set("out", a.out.as_ref().map(|v| v.display().to_string()))?;
    s.set(
        "format",
        a.format.map(|f| match f {
            Format::Json => "json".to_string(),
            Format::Csv => "csv".to_string(),
            Format::Text => "text".to_string(),
        }),
    )?;
    if a.timing {
        s.set("timing", Some("true".into()))?;
    }
    Ok(s)
}

fn cmd_check(a: CheckArgs) -> Result<bool, CliError> {
    let mut resolved = check_settings(&a)?.resolve()?;
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let cap: usize = v.parse().map_err(|_| ConfigError::Value {
            key: THREADS_ENV.into(),
            value: v.clone(),
            reason: "expected a positive integer".into(),
        })?;
        resolved.run.threads = Some(resolved.run.threads.map_or(cap, |t| t.min(cap)).max(1));
    }
    let reports = run_suites(&resolved.suites, &resolved.run)?;
    let mut out = open_out(resolved.out.as_ref())?;
    write_reports(&mut out, &reports, resolved.format)?;
    out.flush()?;
    Ok(reports.iter().all(|r| r.pass))
}

fn complex_arg(key: &str, text: &str) -> Result<C64, ConfigError> {
    parse_complex(text).map_err(|reason| ConfigError::Value { key: key.into(), value: text.into(), reason })
}

fn unit_interval(key: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(ConfigError::Value { key: key.into(), value: x.to_string(), reason: "must lie in (0, 1)".into() })
    }
}

fn cmd_weights(a: WeightsArgs) -> Result<bool, CliError> {
    let z = complex_arg("z", &a.z)?;
    unit_interval("p", a.p)?;
    unit_interval("q", a.q)?;
    if a.lo > a.hi {
        return Err(ConfigError::Value { key: "lo".into(), value: a.lo.to_string(), reason: "must not exceed hi".into() }.into());
    }
    let pol = TruncationPolicy::default();
    let (p, w0, q) = (C64::new(a.p, 0.0), C64::new(a.w, 0.0), C64::new(a.q, 0.0));
    let rows: Vec<WeightRow> = admissible_faces(a.lo, a.hi)
        .into_iter()
        .map(|h| {
            let shift = w0 * q.powi(h.l as i32);
            let (value, error) = match boltzmann_weight(h, z, p, w0, q, &pol) {
                Ok(v) if v.is_finite() => (Some(v), None),
                Ok(_) => (None, Some("non-finite value".to_string())),
                Err(e) => (None, Some(e.to_string())),
            };
            WeightRow {
                l: h.l,
                lp: h.lp,
                m: h.m,
                mp: h.mp,
                z_re: z.re,
                z_im: z.im,
                w_shift_re: shift.re,
                w_shift_im: shift.im,
                re: value.map(|v| v.re),
                im: value.map(|v| v.im),
                error,
            }
        })
        .collect();
    let mut out = open_out(a.out.as_ref())?;
    write_weights(&mut out, &rows, a.format)?;
    out.flush()?;
    Ok(true)
}

fn cmd_converge(a: ConvergeArgs) -> Result<bool, CliError> {
    let target: ConvergeTarget = a
        .target
        .parse()
        .map_err(|reason| ConfigError::Value { key: "target".into(), value: a.target.clone(), reason })?;
    if a.n_min == 0 || a.n_min > a.n_max {
        return Err(ConfigError::Value {
            key: "n_min".into(),
            value: a.n_min.to_string(),
            reason: "need 1 <= n_min <= n_max".into(),
        }
        .into());
    }
    unit_interval("p", a.p)?;
    unit_interval("q", a.q)?;
    let prm = ConvergeParams { z: complex_arg("z", &a.z)?, p: C64::new(a.p, 0.0), w: C64::new(a.w, 0.0), q: C64::new(a.q, 0.0) };
    let ns: Vec<usize> = (a.n_min..=a.n_max).collect();
    let study = converge(target, &ns, &prm, &TruncationPolicy::default())?;
    let mut out = open_out(a.out.as_ref())?;
    write_study(&mut out, &study, a.format)?;
    out.flush()?;
    Ok(true)
}
