//! `hyperbn`: thresholds, kernels, transforms and radial solutions for the
//! higher-order Brezis–Nirenberg problem on hyperbolic space.

mod commands;
mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use commands::{Common, Timings};
use report::{Diagnostic, Format, Outcome, Report, Table};

/// Defaults: grid = 1000, tol = 1e-8, spectral cutoff τ_max = 40 and radial
/// cutoff ρ_max = 8 (transform-check and green).
#[derive(Debug, Parser)]
#[command(name = "hyperbn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Discretization size for eigenvalue and quotient problems (≥ 100).
    #[arg(long, global = true, default_value_t = 1000, value_parser = parse_grid)]
    grid: usize,
    /// Tolerance floor for transform-check comparisons (> 0).
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = parse_tol)]
    tol: f64,
    /// Worker threads (≥ 1).
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    parallel: u32,
    /// Include wall-clock timings in JSON output (breaks byte determinism).
    #[arg(long, global = true)]
    timings: bool,
}

fn parse_grid(s: &str) -> Result<usize, String> {
    let g: usize = s.parse().map_err(|e| format!("{e}"))?;
    if g < 100 {
        return Err("grid must be at least 100".into());
    }
    Ok(g)
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(t > 0.0 && t.is_finite()) {
        return Err("tol must be positive".into());
    }
    Ok(t)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral, Sobolev and HLS constants.
    Constants(commands::ConstantsArgs),
    /// Existence threshold λ* for k = 2 by determinant and by quotient.
    LambdaStar(commands::LambdaStarArgs),
    /// First Dirichlet eigenvalue of P1 or P2 on a geodesic ball.
    Eigen(commands::EigenArgs),
    /// Positive radial solution at one λ, with certificates.
    Solve(commands::SolveArgs),
    /// Resolvent kernel of P_k − λ with its certificate.
    Green(commands::GreenArgs),
    /// Self-tests of the radial spherical transform.
    TransformCheck(commands::TransformCheckArgs),
    /// Pohozaev balance of a k = 2 solution.
    Pohozaev(commands::PohozaevArgs),
    /// Solutions over a range of λ.
    Sweep(commands::SweepArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::LambdaStar(_) => "lambda-star",
            Command::Eigen(_) => "eigen",
            Command::Solve(_) => "solve",
            Command::Green(_) => "green",
            Command::TransformCheck(_) => "transform-check",
            Command::Pohozaev(_) => "pohozaev",
            Command::Sweep(_) => "sweep",
        }
    }

    fn params(&self) -> Value {
        fn v(a: &impl Serialize) -> Value {
            serde_json::to_value(a).expect("arguments serialize")
        }
        match self {
            Command::Constants(a) => v(a),
            Command::LambdaStar(a) => v(a),
            Command::Eigen(a) => v(a),
            Command::Solve(a) => v(a),
            Command::Green(a) => v(a),
            Command::TransformCheck(a) => v(a),
            Command::Pohozaev(a) => v(a),
            Command::Sweep(a) => v(a),
        }
    }

    fn run(&self, c: Common, t: &mut Timings) -> hyperbn::Result<Outcome> {
        match self {
            Command::Constants(a) => commands::constants(a, c, t),
            Command::LambdaStar(a) => commands::lambda_star(a, c, t),
            Command::Eigen(a) => commands::eigen(a, c, t),
            Command::Solve(a) => commands::solve(a, c, t),
            Command::Green(a) => commands::green(a, c, t),
            Command::TransformCheck(a) => commands::transform_check(a, c, t),
            Command::Pohozaev(a) => commands::pohozaev(a, c, t),
            Command::Sweep(a) => commands::sweep(a, c, t),
        }
    }
}

/// Errors caused by the requested parameters rather than by the numerics.
fn is_usage_error(e: &hyperbn::Error) -> bool {
    use hyperbn::Error::*;
    matches!(
        e,
        InvalidDims { .. }
            | InvalidBall(_)
            | DimensionOutOfRange { .. }
            | ExponentOutOfRange(_)
            | DenominatorNonPositive { .. }
            | SpectralBottomViolation(_)
            | UnsupportedDimension(_)
            | ComplexRootsUnsupported(_)
            | LambdaOutOfRange(_)
            | OddOrderUnsupported
            | ArgumentOutOfDomain(_)
    )
}

fn execute(cli: &Cli) -> (Outcome, Timings, u8) {
    let common = Common { grid: cli.grid, tol: cli.tol };
    let mut timings = Timings::new();
    let start = Instant::now();
    let result = cli.command.run(common, &mut timings);
    timings.insert("total".into(), start.elapsed().as_secs_f64());
    match result {
        Ok(out) => {
            let code = if out.failed { 2 } else { 0 };
            (out, timings, code)
        }
        Err(e) => {
            let code = if is_usage_error(&e) { 1 } else { 2 };
            let out = Outcome {
                diagnostics: vec![Diagnostic::error(cli.command.name(), e.to_string())],
                table: Table::new(&["error"]),
                ..Default::default()
            };
            (out, timings, code)
        }
    }
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(threads: u32, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads as usize).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<T: Send>(_threads: u32, f: impl FnOnce() -> T + Send) -> T {
    f()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (mut outcome, timings, code) = with_pool(cli.parallel, || execute(&cli));
    let mut params: BTreeMap<String, Value> = match cli.command.params() {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    params.insert("grid".into(), cli.grid.into());
    params.insert("tol".into(), cli.tol.into());
    params.insert("parallel".into(), cli.parallel.into());
    if let Some(e) = outcome.diagnostics.iter().find(|d| d.level == "error") {
        if cli.format != Format::Json {
            outcome.table.push(vec![e.message.clone().into()]);
        }
        eprintln!("error: {}", e.message);
    }
    let report = Report {
        schema_version: report::SCHEMA_VERSION,
        command: cli.command.name(),
        params: &params,
        results: &outcome.results,
        diagnostics: &outcome.diagnostics,
        timings: cli.timings.then_some(&timings),
    };
    let bytes = match report::render(&report, &outcome.table, cli.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = report::emit(&bytes, cli.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
