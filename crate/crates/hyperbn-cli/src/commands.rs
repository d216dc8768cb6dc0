//! One function per subcommand. Each returns an [`Outcome`] or a library
//! error; the driver turns both into a report.

use std::collections::BTreeMap;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hyperbn::bnsolver::{
    certify_solution, follow_branch, nonexistence_scan, solve_bn, solve_on_branch, RadialSolution, ScanBox,
    SolverOptions,
};
use hyperbn::constants::{
    hls_constant, lambda_bar, lambda_star_upper, pk_symbol, sobolev_constant, symbol_domination_constant,
    underline_lambda, ThresholdReport,
};
use hyperbn::eigen::{first_eigenvalue_p1, first_eigenvalue_p2};
use hyperbn::geometry::sphere_area;
use hyperbn::greens::{
    certify_kernel, geometric_grid, resolvent_kernel_p1, resolvent_kernel_pk, resolvent_kernel_transform,
    KernelProfile,
};
use hyperbn::helgason::{plancherel_check, radial_inverse_values, radial_transform_fn, TransformGrid};
use hyperbn::par::{map_range, Exec};
use hyperbn::thresholds::{cross_check_gap, find_lambda_star, lambda_star_quotient};
use hyperbn::{Error, GeodesicBall, ProblemDims, RadialProfile};

use crate::report::{Cell, Diagnostic, Outcome, Table};

pub type Timings = BTreeMap<String, f64>;

/// Settings shared by all subcommands.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Common {
    pub grid: usize,
    pub tol: f64,
}

fn timed<T>(timings: &mut Timings, key: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.insert(key.to_string(), t.elapsed().as_secs_f64());
    out
}

fn ball(radius: f64) -> hyperbn::Result<GeodesicBall> {
    GeodesicBall::from_euclidean(radius)
}

fn first_eigenvalue(dims: ProblemDims, b: GeodesicBall, grid: usize) -> hyperbn::Result<f64> {
    match dims.k {
        1 => Ok(first_eigenvalue_p1(dims, b, grid)?.value),
        2 => Ok(first_eigenvalue_p2(dims, b, grid)?.value),
        _ => Err(Error::InvalidDims { n: dims.n, k: dims.k }),
    }
}

fn threshold_row(t: &mut Table, r: &ThresholdReport) {
    let name = serde_json::to_value(r.name).unwrap().as_str().unwrap_or_default().to_string();
    t.push(vec![name.into(), r.parameter.unwrap_or(f64::NAN).into(), r.value.into(), r.error_estimate.into()]);
}

// ---------------------------------------------------------------- constants

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    /// Euclidean ball radius; adds the bounded-domain upper threshold.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
}

pub fn constants(a: &ConstantsArgs, c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, a.k)?;
    let mut out = Outcome { table: Table::new(&["name", "parameter", "value", "error_estimate"]), ..Default::default() };
    let bar = lambda_bar(a.k);
    threshold_row(&mut out.table, &bar);
    out.result(&bar);
    let sob = sobolev_constant(dims);
    threshold_row(&mut out.table, &sob);
    out.result(&sob);
    out.result(json!({ "name": "SYMBOL_AT_ZERO", "value": pk_symbol(0.0, a.k), "error_estimate": 0.0 }));
    let mut hls = Vec::new();
    for j in 1..=a.k {
        let exponent = (a.n - 2 * j) as f64;
        if exponent > 0.0 {
            let r = hls_constant(a.n, exponent)?;
            threshold_row(&mut out.table, &r);
            hls.push(r);
        }
    }
    out.result(json!({ "name": "HLS_TABLE", "entries": hls }));
    let half = 0.5 * bar.value;
    let mut dom = Vec::new();
    for j in 1..=a.k {
        let r = symbol_domination_constant(dims, half, j)?;
        if !r.finite_certified {
            out.diagnostics.push(Diagnostic::warning("constants", format!("domination constant for j = {j} not certified")));
        }
        dom.push(json!({ "j": j, "lambda": half, "report": r }));
    }
    out.result(json!({ "name": "SYMBOL_DOMINATION", "entries": dom }));
    match underline_lambda(dims) {
        Ok(r) => {
            threshold_row(&mut out.table, &r);
            out.result(&r);
        }
        Err(e) => out.diagnostics.push(Diagnostic::info("underline_lambda", e.to_string())),
    }
    if let Some(radius) = a.radius {
        let b = ball(radius)?;
        let l1 = timed(timings, "eigen", || first_eigenvalue(dims, b, c.grid))?;
        let r = lambda_star_upper(dims, b, l1)?;
        threshold_row(&mut out.table, &r);
        out.result(&r);
    }
    Ok(out)
}

// ------------------------------------------------------------- lambda-star

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Det,
    Quot,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaStarArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub method: Method,
}

/// Agreement required between the two λ* values.
const CROSS_CHECK_LIMIT: f64 = 0.01;

pub fn lambda_star(a: &LambdaStarArgs, c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, 2)?;
    let b = ball(a.radius)?;
    let mut out = Outcome { table: Table::new(&["method", "lambda_star", "error_estimate", "lambda1"]), ..Default::default() };
    let l1 = timed(timings, "eigen", || first_eigenvalue_p2(dims, b, c.grid))?;
    out.result(json!({ "name": "LAMBDA1_P2", "value": l1.value, "error_estimate": (l1.value - l1.fine_value).abs() }));
    let mut values = Vec::new();
    if a.method != Method::Quot {
        let r = timed(timings, "determinant", || find_lambda_star(dims, b, l1.value))?;
        values.push(r.lambda_star);
        out.table.push(vec!["determinant".into(), r.lambda_star.into(), r.error_estimate.into(), l1.value.into()]);
        if r.lambda_star >= l1.value {
            out.failed = true;
            out.diagnostics.push(Diagnostic::warning("determinant", "determinant root is not below the first eigenvalue"));
        }
        out.result(&r);
    }
    if a.method != Method::Det {
        let r = timed(timings, "quotient", || lambda_star_quotient(dims, b, c.grid))?;
        values.push(r.lambda_star);
        out.table.push(vec!["quotient".into(), r.lambda_star.into(), r.error_estimate.into(), l1.value.into()]);
        if r.lambda_star >= l1.value {
            out.failed = true;
            out.diagnostics.push(Diagnostic::warning("quotient", "quotient value is not below the first eigenvalue"));
        }
        out.result(&r);
    }
    if let [det, quot] = values[..] {
        let gap = cross_check_gap(det, quot);
        let ok = gap <= CROSS_CHECK_LIMIT;
        out.result(json!({ "name": "CROSS_CHECK_GAP", "value": gap, "limit": CROSS_CHECK_LIMIT, "agree": ok }));
        if !ok {
            out.failed = true;
            out.diagnostics.push(Diagnostic::warning("lambda-star", format!("methods disagree: relative gap {gap:.3e}")));
        }
    }
    Ok(out)
}

// ------------------------------------------------------------------- eigen

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
}

pub fn eigen(a: &EigenArgs, c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, a.k)?;
    let b = ball(a.radius)?;
    let r = timed(timings, "eigen", || match a.k {
        1 => first_eigenvalue_p1(dims, b, c.grid),
        2 => first_eigenvalue_p2(dims, b, c.grid),
        _ => Err(Error::InvalidDims { n: a.n, k: a.k }),
    })?;
    let floor = lambda_bar(a.k).value;
    let mut out = Outcome { table: Table::new(&["rho", "phi"]), ..Default::default() };
    for (rho, phi) in r.profile.grid.iter().zip(&r.profile.values) {
        out.table.push(vec![(*rho).into(), (*phi).into()]);
    }
    let above = r.value > floor;
    if !above {
        out.failed = true;
        out.diagnostics.push(Diagnostic::warning("eigen", "eigenvalue not above the spectral floor"));
    }
    out.result(json!({
        "name": if a.k == 1 { "LAMBDA1_P1" } else { "LAMBDA1_P2" },
        "value": r.value,
        "error_estimate": (r.value - r.fine_value).abs(),
        "coarse_value": r.coarse_value,
        "fine_value": r.fine_value,
        "residual": r.residual,
        "grid_size": r.grid_size,
        "spectral_floor": floor,
        "above_floor": above,
    }));
    Ok(out)
}

// ------------------------------------------------------------------- solve

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxKind {
    /// `[10⁻², 10³]²`, 60 points per axis.
    Standard,
    /// `|Δv(0)|` up to 10⁸.
    Wide,
}

impl BoxKind {
    fn scan_box(self) -> ScanBox {
        match self {
            BoxKind::Standard => ScanBox::default(),
            BoxKind::Wide => ScanBox::wide(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Run a shooting scan when no solution is found.
    #[arg(long)]
    pub scan: bool,
    #[arg(long, value_enum, default_value = "wide")]
    pub scan_box: BoxKind,
}

fn solution_record(sol: &RadialSolution) -> serde_json::Value {
    json!({
        "lambda": sol.lambda,
        "shoot_params": sol.shoot_params,
        "certificate": certify_solution(sol),
        "integrals": sol.integrals,
        "min_interior_v": sol.min_interior_v,
        "newton_iterations": sol.newton_iterations,
        "continuation_steps": sol.continuation_steps,
    })
}

fn profile_table(sol: &RadialSolution) -> Table {
    let mut t = Table::new(&["r", "v", "dv", "lap_v", "rho", "u"]);
    let e = &sol.euclid_profile;
    let h = &sol.hyper_profile;
    for i in 0..e.r.len() {
        t.push(vec![e.r[i].into(), e.v[i].into(), e.dv[i].into(), e.lap[i].into(), h.grid[i].into(), h.values[i].into()]);
    }
    t
}

pub fn solve(a: &SolveArgs, _c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, a.k)?;
    let b = ball(a.radius)?;
    let mut out = Outcome::default();
    match timed(timings, "solve", || solve_bn(a.lambda, dims, b)) {
        Ok(sol) => {
            let cert = certify_solution(&sol);
            if !cert.passed {
                out.failed = true;
                out.diagnostics.push(Diagnostic::warning("solve", "solution failed certification"));
            }
            out.result(json!({ "found": true, "solution": solution_record(&sol) }));
            out.table = profile_table(&sol);
        }
        Err(Error::NotFound(msg)) => {
            out.failed = true;
            out.diagnostics.push(Diagnostic::info("solve", format!("no solution: {msg}")));
            out.table = Table::new(&["r", "v", "dv", "lap_v", "rho", "u"]);
            let mut rec = json!({ "found": false });
            if a.scan {
                let report = timed(timings, "scan", || nonexistence_scan(a.lambda, dims, b, &a.scan_box.scan_box()))?;
                rec["scan"] = serde_json::to_value(report).unwrap();
            }
            out.result(rec);
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}

// ---------------------------------------------------------------- pohozaev

#[derive(Debug, Args, Serialize)]
pub struct PohozaevArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
}

pub fn pohozaev(a: &PohozaevArgs, _c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, 2)?;
    let b = ball(a.radius)?;
    let sol = timed(timings, "solve", || solve_bn(a.lambda, dims, b))?;
    let cert = certify_solution(&sol);
    let p = cert.pohozaev.expect("even order");
    let mut out = Outcome {
        table: Table::new(&["boundary", "volume", "gap", "volume_printed_weight", "gap_printed_weight"]),
        ..Default::default()
    };
    out.table.push(vec![p.boundary.into(), p.volume.into(), p.gap.into(), p.volume_literal.into(), p.literal_gap.into()]);
    if !cert.passed {
        out.failed = true;
        out.diagnostics.push(Diagnostic::warning("pohozaev", "solution failed certification"));
    }
    out.diagnostics.push(Diagnostic::info(
        "pohozaev",
        "volume weight 4(p r^2 + 1) p^4; the printed weight 2(p r^2 + 2) p^4 is reported alongside",
    ));
    out.result(json!({ "pohozaev": p, "certificate": cert, "shoot_params": sol.shoot_params }));
    Ok(out)
}

// ------------------------------------------------------------------- green

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMethod {
    /// Closed form, heat-time integral or partial fractions as available.
    Auto,
    /// Spectral inversion of `1/(symbol − λ)`.
    Transform,
}

#[derive(Debug, Args, Serialize)]
pub struct GreenArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: KernelMethod,
    #[arg(long, default_value_t = 1e-2)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 96)]
    pub points: usize,
    /// Skip positivity, monotonicity and delta-probe checks.
    #[arg(long)]
    pub no_certify: bool,
}

pub fn green(a: &GreenArgs, _c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, a.k)?;
    if !(a.rho_min > 0.0 && a.rho_max > a.rho_min) || a.points < 2 {
        return Err(Error::ArgumentOutOfDomain(a.rho_min));
    }
    let grid = geometric_grid(a.rho_min, a.rho_max, a.points);
    let kernel: KernelProfile = timed(timings, "kernel", || match (a.method, a.k) {
        (KernelMethod::Auto, 1) => resolvent_kernel_p1(a.lambda, dims, &grid),
        (KernelMethod::Auto, _) => resolvent_kernel_pk(a.lambda, dims, &grid),
        (KernelMethod::Transform, _) => resolvent_kernel_transform(a.lambda, dims, &grid, &TransformGrid::default()),
    })?;
    let mut out = Outcome { table: Table::new(&["rho", "kernel"]), ..Default::default() };
    for (r, v) in kernel.grid().iter().zip(kernel.values()) {
        out.table.push(vec![(*r).into(), (*v).into()]);
    }
    let mut rec = json!({ "kernel": &kernel });
    if !a.no_certify {
        let cert = timed(timings, "certify", || certify_kernel(&kernel));
        if !(cert.positive && cert.monotone) {
            out.failed = true;
            out.diagnostics.push(Diagnostic::warning("green", "kernel positivity or monotonicity check failed"));
        }
        rec["certificate"] = serde_json::to_value(cert).unwrap();
    }
    out.result(rec);
    Ok(out)
}

// --------------------------------------------------------- transform-check

#[derive(Debug, Args, Serialize)]
pub struct TransformCheckArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Spectral parameter of the resolvent check.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 40.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 8.0)]
    pub rho_max: f64,
}

pub const ROUND_TRIP_LIMIT: f64 = 1e-4;
pub const PLANCHEREL_LIMIT: f64 = 1e-3;
pub const RESOLVENT_LIMIT: f64 = 1e-4;

/// Relative `L²(H^n)` distance of two radial profiles sampled on a uniform
/// grid starting at 0 (trapezoidal rule with the volume weight).
pub fn relative_l2(n: u32, rho: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..rho.len() {
        let w = if i == 0 || i + 1 == rho.len() { 0.5 } else { 1.0 } * sphere_area(n - 1) * rho[i].sinh().powi(n as i32 - 1);
        num += w * (f[i] - g[i]).powi(2);
        den += w * f[i].powi(2);
    }
    (num / den).sqrt()
}

pub fn transform_check(a: &TransformCheckArgs, c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, a.k)?;
    let tgrid = TransformGrid::new(a.tau_max, 0.5, 8)?;
    let mut out = Outcome { table: Table::new(&["check", "value", "limit", "passed"]), ..Default::default() };
    let gauss = |r: f64| (-r * r).exp();
    let rho: Vec<f64> = (0..=120).map(|i| 0.05 * i as f64).collect();
    let (l2, pl) = timed(timings, "gaussian", || -> hyperbn::Result<(f64, f64)> {
        let spec = radial_transform_fn(gauss, dims, a.rho_max, &tgrid)?;
        let back = radial_inverse_values(&spec, &rho)?;
        let exact: Vec<f64> = rho.iter().map(|&r| gauss(r)).collect();
        let l2 = relative_l2(a.n, &rho, &exact, &back);
        let fine: Vec<f64> = (0..=1600).map(|i| a.rho_max * i as f64 / 1600.0).collect();
        let profile = RadialProfile::from_fn(fine, dims, gauss)?;
        Ok((l2, plancherel_check(&profile, &tgrid)?.gap))
    })?;
    let check = |out: &mut Outcome, name: &str, value: f64, limit: f64| {
        let passed = value <= limit;
        out.failed |= !passed;
        out.table.push(vec![Cell::from(name), value.into(), limit.into(), passed.into()]);
        out.result(json!({ "check": name, "value": value, "limit": limit, "passed": passed }));
    };
    check(&mut out, "gaussian_round_trip_l2", l2, ROUND_TRIP_LIMIT.max(c.tol));
    check(&mut out, "gaussian_plancherel_gap", pl, PLANCHEREL_LIMIT);
    // resolvent against the inverse symbol on τ ≤ 10, where it is not yet tiny
    let kgrid = TransformGrid::new(10.0, 0.5, 8)?;
    let err = timed(timings, "resolvent", || -> hyperbn::Result<f64> {
        let kernel = match a.k {
            1 => resolvent_kernel_p1(a.lambda, dims, &geometric_grid(1e-2, 8.0, 16))?,
            _ => resolvent_kernel_pk(a.lambda, dims, &geometric_grid(1e-2, 8.0, 16))?,
        };
        let spec = radial_transform_fn(|r| kernel.evaluate(r), dims, 100.0, &kgrid)?;
        Ok(spec
            .tau()
            .iter()
            .zip(&spec.values)
            .map(|(&t, v)| {
                let exact = 1.0 / (pk_symbol(t, a.k) - a.lambda);
                (v - exact).abs() / exact
            })
            .fold(0.0, f64::max))
    })?;
    check(&mut out, "resolvent_vs_inverse_symbol", err, RESOLVENT_LIMIT);
    Ok(out)
}

// ------------------------------------------------------------------- sweep

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_to: f64,
    /// Number of intervals; the sweep has `steps + 1` points.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
}

pub fn sweep(a: &SweepArgs, c: Common, timings: &mut Timings) -> hyperbn::Result<Outcome> {
    let dims = ProblemDims::new(a.n, a.k)?;
    let b = ball(a.radius)?;
    if a.steps == 0 {
        return Err(Error::ArgumentOutOfDomain(0.0));
    }
    let lambdas: Vec<f64> =
        (0..=a.steps).map(|i| a.lambda_from + (a.lambda_to - a.lambda_from) * i as f64 / a.steps as f64).collect();
    let mut out = Outcome {
        table: Table::new(&["lambda", "found", "nehari_level", "pohozaev_gap", "boundary_residual", "nehari_gap", "certified"]),
        ..Default::default()
    };
    let l1 = timed(timings, "eigen", || first_eigenvalue(dims, b, c.grid))?;
    let opts = SolverOptions { lambda1: Some(l1), ..SolverOptions::default() };
    let lowest = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let branch = if a.k == 2 { Some(timed(timings, "branch", || follow_branch(lowest, dims, b, &opts))?) } else { None };
    let sols = timed(timings, "points", || {
        map_range(Exec::Parallel, lambdas.len(), |i| match &branch {
            Some(pts) => solve_on_branch(lambdas[i], dims, b, pts),
            None => hyperbn::bnsolver::solve_bn_with(lambdas[i], dims, b, &opts),
        })
    });
    let mut found = 0;
    for (l, s) in lambdas.iter().zip(sols) {
        match s {
            Ok(sol) => {
                let cert = certify_solution(&sol);
                found += 1;
                if !cert.passed {
                    out.failed = true;
                }
                let pg = cert.pohozaev.map_or(f64::NAN, |p| p.gap);
                out.table.push(vec![
                    (*l).into(),
                    true.into(),
                    cert.nehari_level.into(),
                    pg.into(),
                    cert.boundary_residual.into(),
                    cert.nehari_gap.into(),
                    cert.passed.into(),
                ]);
                out.result(json!({ "lambda": l, "found": true, "certificate": cert, "shoot_params": sol.shoot_params }));
            }
            Err(e) => {
                let nan = f64::NAN;
                out.table.push(vec![(*l).into(), false.into(), nan.into(), nan.into(), nan.into(), nan.into(), false.into()]);
                out.result(json!({ "lambda": l, "found": false, "reason": e.to_string() }));
            }
        }
    }
    out.diagnostics.push(Diagnostic::info("sweep", format!("first eigenvalue {l1:.12e}; {found} of {} points solved", lambdas.len())));
    Ok(out)
}
