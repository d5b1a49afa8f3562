//! `hyperfrac`: verification reports and plot-ready tables.
//!
//! Exit status: 0 when every assertion passes, 1 on an assertion failure,
//! 2 on usage, domain or I/O errors, 3 when a numerical method fails.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches, Parser, ValueEnum};
use hyperfrac::operator::{CubicTable, EllipticityBounds, Profile};
use hyperfrac::QuadratureConfig;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use commands::{BarrierParams, ConstantParams, KernelParams, SweepParams};
use report::Report;

#[derive(Debug, Error)]
enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] hyperfrac::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// Comma-separated list of finite numbers, at least one.
#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|item| match item.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(format!("not a finite number: {item:?}")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Grid(values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Command {
    VerifyConstant,
    ScaleSweep,
    KernelTable,
    GyroCheck,
    BarrierCheck,
    GammaLimit,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VerifyConstant => "verify_constant",
            Command::ScaleSweep => "scale_sweep",
            Command::KernelTable => "kernel_table",
            Command::GyroCheck => "gyro_check",
            Command::BarrierCheck => "barrier_check",
            Command::GammaLimit => "gamma_limit",
        }
    }

    /// Per-command flags, by clap argument id.
    fn accepts(self) -> &'static [&'static str] {
        match self {
            Command::VerifyConstant => &["lambdas", "gammas", "t", "tol"],
            Command::ScaleSweep => &["radii", "gammas", "rho0", "tol"],
            Command::KernelTable => &["rhos", "gamma", "tau"],
            Command::GyroCheck => &["cases"],
            Command::BarrierCheck => &["delta", "radius", "gamma", "kappa", "lo", "hi", "alpha", "samples", "radii"],
            Command::GammaLimit => &["profile", "profile_csv", "r0", "gammas"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

const GLOBAL: &[&str] = &["command", "out", "format", "seed", "rel_tol", "abs_tol", "timing"];

#[derive(Debug, Parser)]
#[command(name = "hyperfrac", version, about = "Numerical checks for fractional Laplacians on hyperbolic 3-space")]
struct Cli {
    #[arg(long, value_enum)]
    command: Command,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Relative quadrature tolerance (default depends on the command).
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Record wall time (stderr, and JSON metadata).
    #[arg(long)]
    timing: bool,

    #[arg(long)]
    lambdas: Option<Grid>,
    #[arg(long)]
    gammas: Option<Grid>,
    #[arg(long)]
    t: Option<f64>,
    /// Pass threshold on the reported relative errors.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    radii: Option<Grid>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    rhos: Option<Grid>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Lower ellipticity bound.
    #[arg(long)]
    lo: Option<f64>,
    /// Upper ellipticity bound.
    #[arg(long)]
    hi: Option<f64>,
    /// Check a single barrier exponent instead of sweeping.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// e.g. `gaussian:amplitude=1,width=0.5`.
    #[arg(long, conflicts_with = "profile_csv")]
    profile: Option<Profile>,
    /// Two-column CSV with headers `r,u`, knots starting at r = 0.
    #[arg(long)]
    profile_csv: Option<PathBuf>,
    #[arg(long)]
    r0: Option<f64>,
}

/// Parsed invocation: the command, its effective parameters and the sink.
struct RunConfig {
    command: Command,
    params: Map<String, Value>,
    output: Option<PathBuf>,
    format: Format,
}

#[derive(Deserialize)]
struct Knot {
    r: f64,
    u: f64,
}

fn read_profile(path: &Path) -> Result<Profile, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (mut radii, mut values) = (Vec::new(), Vec::new());
    for knot in csv::Reader::from_reader(file).deserialize() {
        let Knot { r, u } = knot?;
        radii.push(r);
        values.push(u);
    }
    Ok(Profile::Tabulated(CubicTable::new(radii, values)?))
}

fn quadrature(cli: &Cli, default_rel: f64) -> Result<QuadratureConfig, CliError> {
    Ok(QuadratureConfig::new(cli.rel_tol.unwrap_or(default_rel), cli.abs_tol)?)
}

fn run(cli: &Cli) -> Result<(RunConfig, Report, QuadratureConfig), CliError> {
    let mut params = Map::new();
    let mut param = |key: &str, v: Value| {
        params.insert(key.to_string(), v);
    };
    let grid = |g: &Option<Grid>, default: &[f64]| g.as_ref().map_or_else(|| default.to_vec(), |g| g.0.clone());

    let default_rel = QuadratureConfig::default().rel_tol;
    let (report, cfg) = match cli.command {
        Command::VerifyConstant => {
            let p = ConstantParams {
                lambdas: grid(&cli.lambdas, &[1e-6, 0.5, 1.0, 2.0, 4.0]),
                gammas: grid(&cli.gammas, &[0.2, 0.5, 0.8, 0.95]),
                t: cli.t.unwrap_or(2.0),
                tol: cli.tol.unwrap_or(1e-6),
            };
            param("lambdas", json!(p.lambdas));
            param("gammas", json!(p.gammas));
            param("t", json!(p.t));
            param("tol", json!(p.tol));
            let cfg = quadrature(cli, default_rel)?;
            (commands::verify_constant(&p, &cfg)?, cfg)
        }
        Command::ScaleSweep => {
            let p = SweepParams {
                radii: grid(&cli.radii, &[0.1, 0.25, 0.5, 1.0, 2.0, 3.5, 5.0]),
                gammas: grid(&cli.gammas, &[0.1, 0.3, 0.5, 0.7, 0.9, 0.95]),
                rho0: cli.rho0.unwrap_or(0.25),
                tol: cli.tol.unwrap_or(1e-8),
            };
            param("radii", json!(p.radii));
            param("gammas", json!(p.gammas));
            param("rho0", json!(p.rho0));
            param("tol", json!(p.tol));
            let cfg = quadrature(cli, default_rel)?;
            (commands::scale_sweep(&p, &cfg)?, cfg)
        }
        Command::KernelTable => {
            let p = KernelParams {
                rhos: grid(&cli.rhos, &[0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0]),
                gamma: cli.gamma.unwrap_or(0.5),
                tau: cli.tau.unwrap_or(1.0),
            };
            param("rhos", json!(p.rhos));
            param("gamma", json!(p.gamma));
            param("tau", json!(p.tau));
            let cfg = quadrature(cli, default_rel)?;
            (commands::kernel_table(&p)?, cfg)
        }
        Command::GyroCheck => {
            let cases = cli.cases.unwrap_or(1000);
            param("cases", json!(cases));
            let cfg = quadrature(cli, default_rel)?;
            (commands::gyro_check(cli.seed, cases)?, cfg)
        }
        Command::BarrierCheck => {
            let p = BarrierParams {
                delta: cli.delta.unwrap_or(0.5),
                radius: cli.radius.unwrap_or(1.0),
                gamma: cli.gamma.unwrap_or(0.99),
                kappa: cli.kappa.unwrap_or(0.25),
                bounds: EllipticityBounds::new(cli.lo.unwrap_or(1.0), cli.hi.unwrap_or(2.0))?,
                alpha: cli.alpha,
                radii: cli.radii.as_ref().map(|g| g.0.clone()),
                samples: cli.samples.unwrap_or(10),
            };
            if p.samples == 0 {
                return Err(CliError::Usage("--samples must be positive".into()));
            }
            param("delta", json!(p.delta));
            param("radius", json!(p.radius));
            param("gamma", json!(p.gamma));
            param("kappa", json!(p.kappa));
            param("lo", json!(p.bounds.lo()));
            param("hi", json!(p.bounds.hi()));
            param("alpha", json!(p.alpha));
            param("radii", json!(p.radii));
            param("samples", json!(p.samples));
            let cfg = quadrature(cli, 1e-8)?;
            (commands::barrier(&p, &cfg)?, cfg)
        }
        Command::GammaLimit => {
            let profile = match (&cli.profile, &cli.profile_csv) {
                (_, Some(path)) => {
                    param("profile_csv", json!(path.display().to_string()));
                    read_profile(path)?
                }
                (Some(p), None) => p.clone(),
                (None, None) => Profile::gaussian(1.0, 1.0)?,
            };
            param("profile", json!(profile.name()));
            let r0 = cli.r0.unwrap_or(0.0);
            let gammas = grid(&cli.gammas, &[0.9, 0.95, 0.99, 0.995]);
            param("r0", json!(r0));
            param("gammas", json!(gammas));
            let cfg = quadrature(cli, 1e-8)?;
            (commands::gamma_sweep(&profile, r0, &gammas, &cfg)?, cfg)
        }
    };
    let rc = RunConfig {
        command: cli.command,
        params,
        output: cli.out.clone(),
        format: cli.format,
    };
    Ok((rc, report, cfg))
}

fn write_report(
    rc: &RunConfig,
    report: &Report,
    seed: u64,
    cfg: &QuadratureConfig,
    wall_time: Option<f64>,
) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match &rc.output {
        Some(path) => Box::new(File::create(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match rc.format {
        Format::Csv => report.write_csv(&mut sink)?,
        Format::Json => {
            let mut meta = Map::new();
            meta.insert("command".into(), json!(rc.command.name()));
            meta.insert("params".into(), Value::Object(rc.params.clone()));
            meta.insert("seed".into(), json!(seed));
            meta.insert(
                "quadrature".into(),
                json!({
                    "rel_tol": cfg.rel_tol,
                    "abs_tol": cfg.abs_tol,
                    "max_subdiv": cfg.max_subdiv,
                }),
            );
            if let Some(secs) = wall_time {
                meta.insert("wall_time_s".into(), json!(secs));
            }
            serde_json::to_writer_pretty(&mut sink, &report.to_json(meta))?;
            writeln!(sink).map_err(|source| CliError::Io {
                path: rc.output.clone().unwrap_or_else(|| "<stdout>".into()),
                source,
            })?;
        }
    }
    sink.flush().map_err(|source| CliError::Io {
        path: rc.output.clone().unwrap_or_else(|| "<stdout>".into()),
        source,
    })
}

fn parse() -> Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches()?;
    let cli = Cli::from_arg_matches(&matches)?;
    let accepted = cli.command.accepts();
    let command = Cli::command();
    for id in command.get_arguments().map(|a| a.get_id().as_str()) {
        if matches.value_source(id) != Some(ValueSource::CommandLine) || GLOBAL.contains(&id) {
            continue;
        }
        if !accepted.contains(&id) {
            let flag = format!("--{}", id.replace('_', "-"));
            return Err(Cli::command().error(
                clap::error::ErrorKind::ArgumentConflict,
                format!("{flag} is not a parameter of {}", cli.command.name()),
            ));
        }
    }
    Ok(cli)
}

fn main() -> ExitCode {
    let cli = match parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let start = Instant::now();
    let outcome = run(&cli).and_then(|(rc, report, cfg)| {
        let wall = cli.timing.then(|| start.elapsed().as_secs_f64());
        write_report(&rc, &report, cli.seed, &cfg, wall)?;
        if let Some(secs) = wall {
            eprintln!("wall time {secs:.3} s");
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            eprintln!("{}: {}", cli.command.name(), report.summary);
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: assertion failed", cli.command.name());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_reject_empty_and_malformed_items() {
        assert_eq!("1, 2.5,1e-3".parse::<Grid>().unwrap().0, vec![1.0, 2.5, 1e-3]);
        assert!("".parse::<Grid>().is_err());
        assert!("1,,2".parse::<Grid>().is_err());
        assert!("1,x".parse::<Grid>().is_err());
        assert!("nan".parse::<Grid>().is_err());
    }

    #[test]
    fn every_command_flag_exists() {
        let cmd = Cli::command();
        let ids: Vec<&str> = cmd.get_arguments().map(|a| a.get_id().as_str()).collect();
        for c in Command::value_variants() {
            for id in c.accepts().iter().chain(GLOBAL) {
                assert!(ids.contains(id), "{id}");
            }
        }
        cmd.debug_assert();
    }
}
