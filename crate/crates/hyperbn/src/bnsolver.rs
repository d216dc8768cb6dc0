//! Radial Brezis–Nirenberg solutions on geodesic balls by shooting.
//!
//! With `p = 2/(1−r²)` and `v = p^{n/2−k} u`, the hyperbolic problem
//! `P_k u − λu = |u|^{q−2}u` on the geodesic ball becomes
//! `(−Δ)^k v = |v|^{q−2}v + λ p^{2k} v` on the Euclidean ball of radius `R`.
//! For `k = 1` the unknown is `a = v(0)`; for `k = 2` it is
//! `(a, b) = (v(0), Δv(0))` with clamped conditions `v(R) = v′(R) = 0`.
//!
//! Energy integrals ride along as extra ODE states, so certification needs no
//! second pass.

use serde::Serialize;

use crate::eigen::{first_eigenvalue_p1, first_eigenvalue_p2};
use crate::error::{Error, Result};
use crate::geometry::{
    conformal_factor, euclid_to_geodesic, geodesic_to_euclid, sphere_area, GeodesicBall, ProblemDims, RadialProfile,
};
use crate::numerics::fd::stencil_weights;
use crate::numerics::ode::{integrate, OdeOptions, OdeStatus};
use crate::numerics::roots::{find_root, Bracket};
use crate::par::{map_range, Exec};

/// State: `v, v′, Δv, (Δv)′` and five running integrals (weight `r^{n−1}`):
/// energy, `p^{2k}v²`, `|v|^q`, and the two Pohozaev volume terms.
const DIM: usize = 9;
const SHOT_TOL: f64 = 1e-11;
const SCAN_TOL: f64 = 1e-9;
const OUTPUT_POINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    HyperbolicToEuclidean,
    EuclideanToHyperbolic,
}

/// Conformal transplantation `v = p^{n/2−k} u` between the geodesic radius
/// `ρ` and the Euclidean radius `r = tanh(ρ/2)`.
pub fn transform_u_v(grid: &[f64], values: &[f64], dims: ProblemDims, direction: Direction) -> (Vec<f64>, Vec<f64>) {
    let e = 0.5 * dims.nf() - dims.k as f64;
    match direction {
        Direction::HyperbolicToEuclidean => grid
            .iter()
            .zip(values)
            .map(|(&rho, &u)| {
                let r = geodesic_to_euclid(rho);
                (r, conformal_factor(r).powf(e) * u)
            })
            .unzip(),
        Direction::EuclideanToHyperbolic => grid
            .iter()
            .zip(values)
            .map(|(&r, &v)| (euclid_to_geodesic(r), conformal_factor(r).powf(-e) * v))
            .unzip(),
    }
}

/// Problem data for one shot.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Model {
    dims: ProblemDims,
    radius: f64,
    lambda: f64,
    /// 1 for the problem, 0 for its linearization at `v = 0`.
    nonlinear: f64,
}

impl Model {
    fn source(&self, r: f64, v: f64) -> f64 {
        let p2k = conformal_factor(r).powi(2 * self.dims.k as i32);
        self.nonlinear * v.abs().powf(self.dims.q - 2.0) * v + self.lambda * p2k * v
    }

    fn rhs(&self, r: f64, y: &[f64; DIM]) -> [f64; DIM] {
        let n = self.dims.nf();
        let (v, dv, w, dw) = (y[0], y[1], y[2], y[3]);
        let p = conformal_factor(r);
        let p2k = p.powi(2 * self.dims.k as i32);
        let f = self.source(r, v);
        let rn = r.powf(n - 1.0);
        let vv = p2k * v * v * rn;
        if self.dims.k == 1 {
            let d2v = -f - (n - 1.0) / r * dv;
            [dv, d2v, 0.0, 0.0, dv * dv * rn, vv, v.abs().powf(self.dims.q) * rn, 0.0, 0.0]
        } else {
            [
                dv,
                w - (n - 1.0) / r * dv,
                dw,
                f - (n - 1.0) / r * dw,
                w * w * rn,
                vv,
                v.abs().powf(self.dims.q) * rn,
                4.0 * (p * r * r + 1.0) * vv,
                2.0 * (p * r * r + 2.0) * vv,
            ]
        }
    }

    /// Start radius, shrunk when the profile concentrates.
    fn start_radius(&self, a: f64) -> f64 {
        let conc = a.abs().powf(2.0 / (self.dims.nf() - 2.0 * self.dims.k as f64)).max(1.0);
        1e-4 * self.radius / conc
    }

    /// Regular expansion at the origin up to `r⁴`, coefficients from the ODE.
    fn initial_state(&self, a: f64, b: f64, eps: f64) -> [f64; DIM] {
        let n = self.dims.nf();
        let q = self.dims.q;
        let f0 = self.source(0.0, a);
        let mut y = [0.0; DIM];
        if self.dims.k == 1 {
            let c2 = -f0 / (2.0 * n);
            // source(r, a + c2 r²) = f0 + f1 r² + …, with p² = 4 + 8r² + …
            let f1 = self.nonlinear * (q - 1.0) * a.abs().powf(q - 2.0) * c2 + 4.0 * self.lambda * (c2 + 2.0 * a);
            let c4 = -f1 / (4.0 * (n + 2.0));
            y[0] = a + c2 * eps * eps + c4 * eps.powi(4);
            y[1] = 2.0 * c2 * eps + 4.0 * c4 * eps.powi(3);
            y[2] = -f0;
        } else {
            let c2 = b / (2.0 * n);
            let b2 = f0 / (2.0 * n);
            let c4 = b2 / (4.0 * (n + 2.0));
            y[0] = a + c2 * eps * eps + c4 * eps.powi(4);
            y[1] = 2.0 * c2 * eps + 4.0 * c4 * eps.powi(3);
            y[2] = b + b2 * eps * eps;
            y[3] = 2.0 * b2 * eps;
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    /// `Δv`.
    pub lap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shot {
    pub a: f64,
    pub b: f64,
    pub v_end: f64,
    pub dv_end: f64,
    pub lap_end: f64,
    /// Smallest `v` over the recorded interior points.
    pub min_interior_v: f64,
    /// First interior radius where `v` changes sign.
    pub first_zero: Option<f64>,
    pub status: OdeStatus,
    /// Running integrals at `R` (without the `|S^{n−1}|` factor).
    pub integrals: [f64; 5],
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

impl Shot {
    pub fn reached_boundary(&self) -> bool {
        self.status == OdeStatus::Complete
    }

    pub fn positive_inside(&self) -> bool {
        self.reached_boundary() && self.first_zero.is_none() && self.min_interior_v > 0.0
    }
}

fn shoot(model: &Model, a: f64, b: f64, tol: f64, record: bool) -> Shot {
    let eps = model.start_radius(a);
    let y0 = model.initial_state(a, b, eps);
    let radius = model.radius;
    let stops: Vec<f64> =
        (1..OUTPUT_POINTS).map(|i| radius * i as f64 / OUTPUT_POINTS as f64).filter(|&r| r > eps).collect();
    let opts = OdeOptions { rtol: tol, atol: tol * 1e-3, h0: Some(eps * 0.1), max_steps: 100_000, dense_record: record };
    let sol = integrate(|r, y| model.rhs(r, y), y0, eps, radius, &stops, &opts);
    let (_, last) = sol.last();
    let mut min_v = f64::INFINITY;
    let mut first_zero = None;
    let mut prev = (eps, y0[0]);
    for (&r, y) in sol.t.iter().zip(&sol.y) {
        if r >= radius * (1.0 - 1e-12) {
            break;
        }
        min_v = min_v.min(y[0]);
        if first_zero.is_none() && y[0] <= 0.0 && prev.1 > 0.0 {
            first_zero = Some(prev.0 + (r - prev.0) * prev.1 / (prev.1 - y[0]));
        }
        prev = (r, y[0]);
    }
    let lap_of = |r: f64, y: &[f64; DIM]| if model.dims.k == 1 { -model.source(r, y[0]) } else { y[2] };
    let trajectory = record.then(|| {
        let mut t = Trajectory { r: vec![0.0], v: vec![a], dv: vec![0.0], lap: vec![lap_of(0.0, &y0)] };
        if model.dims.k == 2 {
            t.lap[0] = b;
        }
        for (&r, y) in sol.t.iter().zip(&sol.y) {
            if r > *t.r.last().unwrap() {
                t.r.push(r);
                t.v.push(y[0]);
                t.dv.push(y[1]);
                t.lap.push(lap_of(r, y));
            }
        }
        t
    });
    let (t_end, _) = sol.last();
    Shot {
        a,
        b,
        v_end: last[0],
        dv_end: last[1],
        lap_end: lap_of(t_end, &last),
        min_interior_v: min_v,
        first_zero,
        status: sol.status,
        integrals: [last[4], last[5], last[6], last[7], last[8]],
        trajectory,
    }
}

fn check_order(dims: ProblemDims, k: u32) -> Result<()> {
    if dims.k != k {
        return Err(Error::InvalidDims { n: dims.n, k: dims.k });
    }
    Ok(())
}

/// One shot of the `k = 1` problem from `v(0) = a`.
pub fn shoot_k1(lambda: f64, dims: ProblemDims, ball: GeodesicBall, a: f64) -> Result<Shot> {
    check_order(dims, 1)?;
    let model = Model { dims, radius: ball.radius, lambda, nonlinear: 1.0 };
    blow_up_check(shoot(&model, a, 0.0, SHOT_TOL, true))
}

/// One shot of the `k = 2` problem from `(v(0), Δv(0)) = (a, b)`.
pub fn shoot_k2(lambda: f64, dims: ProblemDims, ball: GeodesicBall, a: f64, b: f64) -> Result<Shot> {
    check_order(dims, 2)?;
    let model = Model { dims, radius: ball.radius, lambda, nonlinear: 1.0 };
    blow_up_check(shoot(&model, a, b, SHOT_TOL, true))
}

fn blow_up_check(shot: Shot) -> Result<Shot> {
    if shot.reached_boundary() {
        Ok(shot)
    } else {
        Err(Error::BlowUp { a: shot.a, b: shot.b })
    }
}

/// Finite-difference Jacobian of `(v(R), v′(R))` with respect to `(a, b)`.
pub fn boundary_jacobian(lambda: f64, dims: ProblemDims, ball: GeodesicBall, a: f64, b: f64) -> Result<[[f64; 2]; 2]> {
    check_order(dims, 2)?;
    let model = Model { dims, radius: ball.radius, lambda, nonlinear: 1.0 };
    let (ha, hb) = (1e-6 * a.abs().max(1e-3), 1e-6 * b.abs().max(1.0));
    let f = |a: f64, b: f64| {
        let s = shoot(&model, a, b, SHOT_TOL, false);
        [s.v_end, s.dv_end]
    };
    let (pa, ma, pb, mb) = (f(a + ha, b), f(a - ha, b), f(a, b + hb), f(a, b - hb));
    Ok([
        [(pa[0] - ma[0]) / (2.0 * ha), (pb[0] - mb[0]) / (2.0 * hb)],
        [(pa[1] - ma[1]) / (2.0 * ha), (pb[1] - mb[1]) / (2.0 * hb)],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionIntegrals {
    /// `∫(Δv)²` for `k = 2`, `∫|∇v|²` for `k = 1`.
    pub energy: f64,
    /// `∫ p^{2k} v²`.
    pub weighted_l2: f64,
    /// `∫ |v|^q`.
    pub lq: f64,
    /// `∫ 4(p r² + 1) p⁴ v²`.
    pub pohozaev_volume: f64,
    /// `∫ 2(p r² + 2) p⁴ v²`, the weight as printed in the source identity.
    pub pohozaev_volume_literal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub dims: ProblemDims,
    pub ball: GeodesicBall,
    pub lambda: f64,
    pub euclid_profile: Trajectory,
    /// `u` against the geodesic radius.
    pub hyper_profile: RadialProfile,
    /// `[a]` for `k = 1`, `[a, b]` for `k = 2`.
    pub shoot_params: Vec<f64>,
    /// `max(|v(R)|, |v′(R)|) / |v(0)|` (only `|v(R)|` for `k = 1`).
    pub boundary_residual: f64,
    pub min_interior_v: f64,
    pub integrals: SolutionIntegrals,
    pub newton_iterations: usize,
    pub continuation_steps: usize,
}

impl RadialSolution {
    fn from_shot(model: &Model, ball: GeodesicBall, shot: Shot, iterations: usize, steps: usize) -> Result<Self> {
        let traj = shot.trajectory.clone().expect("recorded shot");
        let dims = model.dims;
        let (rho, u) = transform_u_v(&traj.r, &traj.v, dims, Direction::EuclideanToHyperbolic);
        let hyper_profile = RadialProfile::new(rho, u, dims)?;
        let area = sphere_area(dims.n - 1);
        let i = shot.integrals;
        let integrals = SolutionIntegrals {
            energy: area * i[0],
            weighted_l2: area * i[1],
            lq: area * i[2],
            pohozaev_volume: area * i[3],
            pohozaev_volume_literal: area * i[4],
        };
        let boundary_residual = if dims.k == 1 {
            shot.v_end.abs() / shot.a.abs()
        } else {
            shot.v_end.abs().max(shot.dv_end.abs()) / shot.a.abs()
        };
        let shoot_params = if dims.k == 1 { vec![shot.a] } else { vec![shot.a, shot.b] };
        Ok(Self {
            dims,
            ball,
            lambda: model.lambda,
            euclid_profile: traj,
            hyper_profile,
            shoot_params,
            boundary_residual,
            min_interior_v: shot.min_interior_v,
            integrals,
            newton_iterations: iterations,
            continuation_steps: steps,
        })
    }

    pub fn is_positive(&self) -> bool {
        self.min_interior_v > 0.0
    }

    /// `‖v‖_q^{q−2}`, the Nehari level.
    pub fn nehari_level(&self) -> f64 {
        self.integrals.lq.powf(1.0 - 2.0 / self.dims.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// First Dirichlet eigenvalue of `P_k` on the ball; computed when absent.
    pub lambda1: Option<f64>,
    /// Largest `v(0)` the continuation may reach.
    pub a_max: f64,
    /// Initial multiplicative amplitude step.
    pub a_step: f64,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { lambda1: None, a_max: 1e3, a_step: 1.25, max_steps: 600 }
    }
}

fn first_eigenvalue(dims: ProblemDims, ball: GeodesicBall) -> Result<f64> {
    Ok(if dims.k == 1 { first_eigenvalue_p1(dims, ball, 800)?.value } else { first_eigenvalue_p2(dims, ball, 800)?.value })
}

/// Positive radial solution at `λ`, or `NotFound`.
pub fn solve_bn(lambda: f64, dims: ProblemDims, ball: GeodesicBall) -> Result<RadialSolution> {
    solve_bn_with(lambda, dims, ball, &SolverOptions::default())
}

pub fn solve_bn_with(lambda: f64, dims: ProblemDims, ball: GeodesicBall, opts: &SolverOptions) -> Result<RadialSolution> {
    match dims.k {
        1 => solve_k1(lambda, dims, ball, opts),
        2 => solve_k2(lambda, dims, ball, opts),
        _ => Err(Error::InvalidDims { n: dims.n, k: dims.k }),
    }
}

fn solve_k1(lambda: f64, dims: ProblemDims, ball: GeodesicBall, opts: &SolverOptions) -> Result<RadialSolution> {
    let model = Model { dims, radius: ball.radius, lambda, nonlinear: 1.0 };
    let amps: Vec<f64> = (0..=120).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 120.0)).filter(|a| *a <= opts.a_max).collect();
    let shots: Vec<Shot> = map_range(Exec::default(), amps.len(), |i| shoot(&model, amps[i], 0.0, SHOT_TOL, false));
    // v(R) > 0 with no interior zero, followed by v(R) ≤ 0: the first zero of v
    // has just entered the ball
    let pos = shots.windows(2).position(|w| w[0].positive_inside() && w[0].v_end > 0.0 && w[1].reached_boundary() && w[1].v_end <= 0.0);
    let Some(i) = pos else {
        return Err(Error::NotFound(format!("no sign change of v(R) with v > 0 inside for a in [1e-3, {:e}]", opts.a_max)));
    };
    let g = |a: f64| shoot(&model, a, 0.0, SHOT_TOL, false).v_end;
    let bracket = Bracket::new(amps[i], amps[i + 1], shots[i].v_end, shots[i + 1].v_end)?;
    let a = find_root(g, bracket, 1e-14 * amps[i + 1])?;
    let shot = shoot(&model, a, 0.0, SHOT_TOL, true);
    if !shot.positive_inside() {
        return Err(Error::NotFound("positivity lost at the located amplitude".into()));
    }
    RadialSolution::from_shot(&model, ball, shot, 0, amps.len())
}

fn residual_k2(model: &Model, a: f64, b: f64) -> ([f64; 2], Shot) {
    let s = shoot(model, a, b, SHOT_TOL, false);
    ([s.v_end / a, s.dv_end * model.radius / a], s)
}

fn solve2(j: [[f64; 2]; 2], f: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([(f[0] * j[1][1] - f[1] * j[0][1]) / det, (j[0][0] * f[1] - j[1][0] * f[0]) / det])
}

fn norm(f: [f64; 2]) -> f64 {
    f[0].hypot(f[1])
}

/// Newton on `(b, λ)` at fixed `a`.
fn newton_b_lambda(model: &Model, a: f64, mut b: f64, mut lambda: f64) -> Option<(f64, f64, usize)> {
    let eval = |b: f64, l: f64| {
        let m = Model { lambda: l, ..*model };
        let (f, s) = residual_k2(&m, a, b);
        if s.reached_boundary() { Some(f) } else { None }
    };
    let mut f = eval(b, lambda)?;
    for it in 0..40 {
        let db = central_difference(|x| eval(x, lambda), b, 1e-6 * b.abs().max(1.0))?;
        let dl = central_difference(|x| eval(b, x), lambda, 1e-6 * lambda.abs().max(1.0))?;
        let d = solve2([[db[0], dl[0]], [db[1], dl[1]]], f)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let (nb, nl) = (b - t * d[0], lambda - t * d[1]);
            if let Some(nf) = eval(nb, nl) {
                if norm(nf) < norm(f) || norm(nf) < 1e-13 {
                    accepted = Some((nb, nl, nf));
                    break;
                }
            }
            t *= 0.5;
        }
        let (nb, nl, nf) = accepted?;
        let small = (nb - b).abs() <= 1e-12 * b.abs().max(1.0) && (nl - lambda).abs() <= 1e-12 * lambda.abs().max(1.0);
        b = nb;
        lambda = nl;
        f = nf;
        if small || norm(f) < 1e-13 {
            return Some((b, lambda, it + 1));
        }
    }
    (norm(f) < 1e-10).then_some((b, lambda, 40))
}

/// Central difference of a vector map, shrinking the step while either side
/// fails to reach the boundary.
fn central_difference(g: impl Fn(f64) -> Option<[f64; 2]>, x: f64, h0: f64) -> Option<[f64; 2]> {
    let mut h = h0;
    for _ in 0..6 {
        if let (Some(p), Some(m)) = (g(x + h), g(x - h)) {
            return Some([(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)]);
        }
        h *= 0.1;
    }
    None
}

/// Damped Newton on `(a, b)` at fixed `λ`.
fn newton_a_b(model: &Model, mut a: f64, mut b: f64) -> Option<(f64, f64, usize)> {
    let eval = |a: f64, b: f64| {
        let (f, s) = residual_k2(model, a, b);
        if s.reached_boundary() && a > 0.0 { Some(f) } else { None }
    };
    let mut f = eval(a, b)?;
    for it in 0..60 {
        if norm(f) < 1e-13 {
            return Some((a, b, it));
        }
        let da = central_difference(|x| eval(x, b), a, 1e-6 * a.abs())?;
        let db = central_difference(|x| eval(a, x), b, 1e-6 * b.abs().max(1.0))?;
        let d = solve2([[da[0], db[0]], [da[1], db[1]]], f)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let (na, nb) = (a - t * d[0], b - t * d[1]);
            if let Some(nf) = eval(na, nb) {
                if norm(nf) < norm(f) {
                    accepted = Some((na, nb, nf));
                    break;
                }
            }
            t *= 0.5;
        }
        let (na, nb, nf) = accepted?;
        let small = (na - a).abs() <= 1e-13 * a.abs() && (nb - b).abs() <= 1e-13 * b.abs().max(1.0);
        a = na;
        b = nb;
        f = nf;
        if small {
            return Some((a, b, it + 1));
        }
    }
    (norm(f) < 1e-10).then_some((a, b, 60))
}

/// Point `(a, b, λ)` on the branch of positive solutions bifurcating from
/// `(0, Λ₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

/// Linear eigenpair: `Δ²v = λ p⁴ v` with `v(0) = 1`, clamped at `R`.
fn linear_seed(dims: ProblemDims, ball: GeodesicBall, lambda1: f64) -> Option<(f64, f64)> {
    let model = Model { dims, radius: ball.radius, lambda: lambda1, nonlinear: 0.0 };
    let e1 = shoot(&model, 1.0, 0.0, SHOT_TOL, false);
    let e2 = shoot(&model, 0.0, 1.0, SHOT_TOL, false);
    // v(R) = a·e1 + b·e2 is linear; take the row with the larger b-coefficient
    let b0 = if (e2.v_end * ball.radius).abs() >= e2.dv_end.abs() * ball.radius * ball.radius {
        -e1.v_end / e2.v_end
    } else {
        -e1.dv_end / e2.dv_end
    };
    let (b, l, _) = newton_b_lambda(&model, 1.0, b0, lambda1)?;
    Some((b, l))
}

/// Follow the positive branch from the bifurcation point until `λ` drops to
/// `target` (or the amplitude limit is hit). Returns the branch points.
pub fn follow_branch(
    target: f64,
    dims: ProblemDims,
    ball: GeodesicBall,
    opts: &SolverOptions,
) -> Result<Vec<BranchPoint>> {
    check_order(dims, 2)?;
    let lambda1 = match opts.lambda1 {
        Some(l) => l,
        None => first_eigenvalue(dims, ball)?,
    };
    let (b_lin, l_lin) =
        linear_seed(dims, ball, lambda1).ok_or_else(|| Error::NotFound("linear eigenpair not resolved".into()))?;
    let model = Model { dims, radius: ball.radius, lambda: l_lin, nonlinear: 1.0 };
    let a0 = 1e-3;
    let (b, l, _) = newton_b_lambda(&model, a0, b_lin * a0, l_lin)
        .ok_or_else(|| Error::NotFound("branch start did not converge".into()))?;
    let mut pts = vec![BranchPoint { a: a0, b, lambda: l }];
    let mut step = opts.a_step;
    while pts.last().unwrap().lambda > target {
        let cur = *pts.last().unwrap();
        if pts.len() > opts.max_steps || cur.a >= opts.a_max {
            break;
        }
        let a_new = (cur.a * step).min(opts.a_max);
        let (bg, lg) = match pts.len() {
            1 => (cur.b * a_new / cur.a, cur.lambda),
            m => {
                // |b| grows like a power of a: extrapolate ln|b| and λ in ln a
                let prev = pts[m - 2];
                let s = (a_new / cur.a).ln() / (cur.a / prev.a).ln();
                let b = if cur.b * prev.b > 0.0 {
                    cur.b * (cur.b / prev.b).powf(s)
                } else {
                    cur.b + (cur.b - prev.b) * s
                };
                (b, cur.lambda + (cur.lambda - prev.lambda) * s)
            }
        };
        let ok = newton_b_lambda(&model, a_new, bg, lg).filter(|&(b, l, _)| {
            let m = Model { lambda: l, ..model };
            shoot(&m, a_new, b, SHOT_TOL, false).positive_inside()
        });
        match ok {
            Some((b, l, _)) => {
                pts.push(BranchPoint { a: a_new, b, lambda: l });
                step = (1.0 + 1.25 * (step - 1.0)).min(opts.a_step);
                // λ levels off as the solutions concentrate; stop once the
                // decrease per doubling of the amplitude is slowing down, is
                // small against the drop so far and closes under 1% of the
                // distance still to go
                let back = |f: f64| pts.iter().rev().find(|p| p.a <= f * a_new).copied();
                if let (Some(half), Some(quarter)) = (back(0.5), back(0.25)) {
                    let (last, before) = (half.lambda - l, quarter.lambda - half.lambda);
                    let dropped = pts[0].lambda - l;
                    let settled = dropped > 0.01 * pts[0].lambda.abs();
                    if settled && last < before && last < 0.1 * dropped && last < 0.01 * (l - target) {
                        break;
                    }
                }
            }
            None => {
                step = 1.0 + 0.5 * (step - 1.0);
                if step < 1.0 + 1e-6 {
                    break;
                }
            }
        }
    }
    Ok(pts)
}

fn solve_k2(lambda: f64, dims: ProblemDims, ball: GeodesicBall, opts: &SolverOptions) -> Result<RadialSolution> {
    let pts = follow_branch(lambda, dims, ball, opts)?;
    solve_on_branch(lambda, dims, ball, &pts)
}

/// `k = 2` solution at `λ` warm-started from a branch computed by
/// [`follow_branch`] (which may have been followed further than `λ`).
pub fn solve_on_branch(lambda: f64, dims: ProblemDims, ball: GeodesicBall, pts: &[BranchPoint]) -> Result<RadialSolution> {
    check_order(dims, 2)?;
    let seg = pts.windows(2).position(|w| (w[0].lambda - lambda) * (w[1].lambda - lambda) <= 0.0);
    let Some(i) = seg else {
        let lo = pts.iter().map(|p| p.lambda).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.lambda).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::NotFound(format!("positive branch spans lambda in [{lo:.6}, {hi:.6}]; target {lambda} outside")));
    };
    let (prev, last) = (pts[i], pts[i + 1]);
    let model = Model { dims, radius: ball.radius, lambda, nonlinear: 1.0 };
    let s = if last.lambda == prev.lambda { 0.0 } else { (lambda - prev.lambda) / (last.lambda - prev.lambda) };
    // b grows like a power of a far out on the branch
    let b_at = |a: f64| -> f64 {
        if prev.b * last.b > 0.0 && prev.a > 0.0 {
            let t = (a / prev.a).ln() / (last.a / prev.a).ln();
            prev.b * (last.b / prev.b).powf(t)
        } else {
            prev.b + (a - prev.a) * (last.b - prev.b) / (last.a - prev.a)
        }
    };
    let a_guess = prev.a + s * (last.a - prev.a);
    let (a, b, iters) = match newton_a_b(&model, a_guess, b_at(a_guess)) {
        Some(x) => x,
        None => {
            // fall back to root finding in a along the branch
            let lam_at = |a: f64| {
                let t = (a - prev.a) / (last.a - prev.a);
                prev.lambda + t * (last.lambda - prev.lambda)
            };
            let along = |a: f64| -> f64 {
                newton_b_lambda(&model, a, b_at(a), lam_at(a)).map(|(_, l, _)| l - lambda).unwrap_or(f64::NAN)
            };
            let bracket = Bracket::new(prev.a, last.a, prev.lambda - lambda, last.lambda - lambda)?;
            let a = find_root(along, bracket, 1e-13 * last.a)?;
            let (b, _, it) = newton_b_lambda(&model, a, b_at(a), lam_at(a))
                .ok_or_else(|| Error::NotFound("Newton on (b, lambda) stalled".into()))?;
            match newton_a_b(&model, a, b) {
                Some(x) => x,
                None => (a, b, it),
            }
        }
    };
    let shot = shoot(&model, a, b, SHOT_TOL, true);
    if !shot.positive_inside() {
        return Err(Error::NotFound("solution found but positivity violated".into()));
    }
    RadialSolution::from_shot(&model, ball, shot, iters, i + 2)
}

/// Relative gap in `∫(Δv)² − λ∫p⁴v² = ∫|v|^q` (`k = 1`: `|∇v|²`, `p²`).
pub fn nehari_residual(sol: &RadialSolution) -> f64 {
    let i = &sol.integrals;
    let lhs = i.energy - sol.lambda * i.weighted_l2;
    (lhs - i.lq).abs() / i.lq.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevCheck {
    /// `½ |S^{n−1}| R^n (Δv(R))²`.
    pub boundary: f64,
    /// `(λ/2) ∫ 4(p r² + 1) p⁴ v²`.
    pub volume: f64,
    pub gap: f64,
    /// Volume term with the printed weight `2(p r² + 2)`.
    pub volume_literal: f64,
    pub literal_gap: f64,
}

/// Pohozaev balance for `k = 2`.
pub fn pohozaev_residual(sol: &RadialSolution) -> Result<PohozaevCheck> {
    if sol.dims.k % 2 == 1 {
        return Err(Error::OddOrderUnsupported);
    }
    let n = sol.dims.n;
    let lap_r = *sol.euclid_profile.lap.last().unwrap();
    let boundary = 0.5 * sphere_area(n - 1) * sol.ball.radius.powi(n as i32) * lap_r * lap_r;
    let volume = 0.5 * sol.lambda * sol.integrals.pohozaev_volume;
    let volume_literal = 0.5 * sol.lambda * sol.integrals.pohozaev_volume_literal;
    let gap = (boundary - volume).abs() / boundary.abs().max(volume.abs());
    let literal_gap = (boundary - volume_literal).abs() / boundary.abs().max(volume_literal.abs());
    Ok(PohozaevCheck { boundary, volume, gap, volume_literal, literal_gap })
}

pub const BOUNDARY_TOL: f64 = 1e-6;
pub const NEHARI_TOL: f64 = 1e-4;
pub const POHOZAEV_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionCertificate {
    pub positive: bool,
    pub boundary_residual: f64,
    pub nehari_gap: f64,
    /// `k = 2` only.
    pub pohozaev: Option<PohozaevCheck>,
    pub quotient: f64,
    pub nehari_level: f64,
    pub passed: bool,
}

/// All solution checks against [`BOUNDARY_TOL`], [`NEHARI_TOL`] and
/// [`POHOZAEV_TOL`].
pub fn certify_solution(sol: &RadialSolution) -> SolutionCertificate {
    let nehari_gap = nehari_residual(sol);
    let pohozaev = pohozaev_residual(sol).ok();
    let passed = sol.is_positive()
        && sol.boundary_residual <= BOUNDARY_TOL
        && nehari_gap <= NEHARI_TOL
        && pohozaev.is_none_or(|p| p.gap <= POHOZAEV_TOL);
    SolutionCertificate {
        positive: sol.is_positive(),
        boundary_residual: sol.boundary_residual,
        nehari_gap,
        pohozaev,
        quotient: rayleigh_quotient(sol),
        nehari_level: sol.nehari_level(),
        passed,
    }
}

/// `(∫(Δv)² − λ∫p⁴v²) / ‖v‖_q²` on a certified solution.
pub fn rayleigh_quotient(sol: &RadialSolution) -> f64 {
    let i = &sol.integrals;
    (i.energy - sol.lambda * i.weighted_l2) / i.lq.powf(2.0 / sol.dims.q)
}

/// The same quotient for a probe `v` sampled on the uniform grid
/// `r_i = iR/N`, `i = 0..=N`, by finite differences and Simpson's rule.
pub fn rayleigh_quotient_profile(v: &[f64], lambda: f64, dims: ProblemDims, ball: GeodesicBall) -> Result<f64> {
    let m = v.len();
    if m < 9 || !(m - 1).is_multiple_of(2) {
        return Err(Error::GridTooCoarse { needed: 9, got: m });
    }
    let h = ball.radius / (m - 1) as f64;
    let n = dims.nf();
    let deriv = |i: usize, d: usize| -> f64 {
        let (lo, hi) = if i < 3 { (-(i as i32), 6 - i as i32) } else if i + 3 >= m { (-(6 - (m - 1 - i) as i32), (m - 1 - i) as i32) } else { (-3, 3) };
        let w = stencil_weights(lo, hi, 0.0, d, h);
        w.iter().enumerate().map(|(j, c)| c * v[(i as i32 + lo + j as i32) as usize]).sum()
    };
    let lap: Vec<f64> = (0..m)
        .map(|i| if i == 0 { n * deriv(0, 2) } else { deriv(i, 2) + (n - 1.0) / (i as f64 * h) * deriv(i, 1) })
        .collect();
    let simpson = |g: &dyn Fn(usize) -> f64| -> f64 {
        let mut s = g(0) + g(m - 1);
        for i in 1..m - 1 {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i);
        }
        s * h / 3.0
    };
    let r = |i: usize| i as f64 * h;
    let w = |i: usize| r(i).powf(n - 1.0);
    let p2k = |i: usize| conformal_factor(r(i)).powi(2 * dims.k as i32);
    let energy = if dims.k == 1 {
        simpson(&|i| deriv(i, 1).powi(2) * w(i))
    } else {
        simpson(&|i| lap[i] * lap[i] * w(i))
    };
    let l2 = simpson(&|i| p2k(i) * v[i] * v[i] * w(i));
    let lq = simpson(&|i| v[i].abs().powf(dims.q) * w(i));
    let area = sphere_area(dims.n - 1);
    Ok(area * (energy - lambda * l2) / (area * lq).powf(2.0 / dims.q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub lambda: f64,
    pub a_values: Vec<f64>,
    /// Signed `b = Δv(0)` values (empty for `k = 1`).
    pub b_values: Vec<f64>,
    pub shots: usize,
    pub blow_ups: usize,
    pub positive_shots: usize,
    /// Amplitude intervals where the positivity threshold switches between a
    /// zero at the boundary and an interior touching zero (`k = 2`), or where
    /// `v(R)` changes sign next to a positive shot (`k = 1`).
    pub candidates: usize,
    /// Candidates refined into positive solutions with `v(R) = v′(R) = 0`.
    pub certified: usize,
    /// Positivity threshold per amplitude (`k = 2`).
    pub thresholds: Vec<ThresholdPoint>,
}

/// Edge of the set of `b` for which `v` stays positive up to `R` or blows up
/// without a zero. Below it `v` reaches zero first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub a: f64,
    pub b: f64,
    /// Where the zero sits just below the threshold.
    pub zero_radius: f64,
    /// The limiting zero is at `R` rather than an interior touching point.
    pub at_boundary: bool,
    /// `v′(R)·R/a` on the positive side when the zero is at `R`.
    pub boundary_slope: f64,
    #[serde(skip)]
    pub shots: usize,
}

/// `v` hits zero before `R` (or before the integration broke down).
fn zero_first(s: &Shot) -> bool {
    s.first_zero.is_some() || (s.reached_boundary() && s.v_end <= 0.0)
}

/// Bisect the topmost zero-first transition of a row of shots in `b`.
fn threshold_from_row(model: &Model, a: f64, b_values: &[f64], row: &[Shot]) -> Option<ThresholdPoint> {
    let j = (0..row.len() - 1).rev().find(|&j| zero_first(&row[j]) && !zero_first(&row[j + 1]))?;
    let (mut lo, mut hi) = (b_values[j], b_values[j + 1]);
    let mut shots = 0;
    let (mut s_lo, mut s_hi) = (row[j].clone(), row[j + 1].clone());
    while hi - lo > 1e-14 * lo.abs().max(hi.abs()).max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = shoot(model, a, mid, SCAN_TOL, false);
        shots += 1;
        if zero_first(&s) {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
            s_hi = s;
        }
    }
    // a touching zero just inside R can fall between output samples; the
    // outgoing slope tells it apart from a genuine zero at R
    let at_boundary = s_lo.first_zero.is_none() && s_hi.reached_boundary() && s_hi.dv_end < 0.0;
    let zero_radius = s_lo.first_zero.unwrap_or(model.radius);
    let boundary_slope = if at_boundary { s_hi.dv_end * model.radius / a } else { f64::NAN };
    Some(ThresholdPoint { a, b: hi, zero_radius, at_boundary, boundary_slope, shots })
}

fn threshold_at(model: &Model, a: f64, b_values: &[f64]) -> (Option<ThresholdPoint>, usize) {
    let row: Vec<Shot> = b_values.iter().map(|&b| shoot(model, a, b, SCAN_TOL, false)).collect();
    let t = threshold_from_row(model, a, b_values, &row);
    let used = b_values.len() + t.map_or(0, |t| t.shots);
    (t, used)
}

/// Bisect in `a` on the threshold type, then polish with Newton on `(a, b)`.
fn refine_candidate(
    model: &Model,
    b_values: &[f64],
    mut lo: ThresholdPoint,
    mut hi: ThresholdPoint,
) -> (Option<(f64, f64)>, usize) {
    let mut used = 0;
    for _ in 0..50 {
        if hi.a - lo.a <= 1e-10 * hi.a {
            break;
        }
        let (t, n) = threshold_at(model, (lo.a * hi.a).sqrt(), b_values);
        used += n;
        let Some(t) = t else { break };
        if t.at_boundary == lo.at_boundary {
            lo = t;
        } else {
            hi = t;
        }
    }
    let start = if lo.at_boundary { lo } else { hi };
    let found = newton_a_b(model, start.a, start.b).filter(|&(a, b, _)| {
        let s = shoot(model, a, b, SHOT_TOL, false);
        used += 1;
        s.positive_inside() && s.v_end.abs().max(s.dv_end.abs()) <= 1e-6 * a
    });
    (found.map(|(a, b, _)| (a, b)), used)
}

/// Log-spaced values on `[lo, hi]`.
fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
}

/// Log grids scanned for `a = v(0)` and `|b| = |Δv(0)|`; `b` takes both
/// signs and zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanBox {
    pub a_lo: f64,
    pub a_hi: f64,
    pub a_count: usize,
    pub b_lo: f64,
    pub b_hi: f64,
    /// Points per sign of `b`.
    pub b_count: usize,
}

impl Default for ScanBox {
    /// `[10⁻², 10³]²` with 60 points per axis.
    fn default() -> Self {
        Self { a_lo: 1e-2, a_hi: 1e3, a_count: 60, b_lo: 1e-2, b_hi: 1e3, b_count: 60 }
    }
}

impl ScanBox {
    /// Reaches `|b| = 10⁸`, enough to contain the positive branch on the
    /// balls of interest (`|Δv(0)|` grows much faster than `v(0)` along it).
    pub fn wide() -> Self {
        Self { b_hi: 1e8, b_count: 120, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        for (lo, hi, count) in [(self.a_lo, self.a_hi, self.a_count), (self.b_lo, self.b_hi, self.b_count)] {
            if count < 2 || !(lo > 0.0 && hi > lo) {
                return Err(Error::ArgumentOutOfDomain(lo));
            }
        }
        Ok(())
    }
}

/// Exhaustive shooting scan for positive solutions over a [`ScanBox`].
pub fn nonexistence_scan(lambda: f64, dims: ProblemDims, ball: GeodesicBall, bx: &ScanBox) -> Result<ScanReport> {
    nonexistence_scan_with(Exec::default(), lambda, dims, ball, bx)
}

pub fn nonexistence_scan_with(
    exec: Exec,
    lambda: f64,
    dims: ProblemDims,
    ball: GeodesicBall,
    bx: &ScanBox,
) -> Result<ScanReport> {
    bx.validate()?;
    let count = bx.a_count;
    let model = Model { dims, radius: ball.radius, lambda, nonlinear: 1.0 };
    let a_values = log_grid(bx.a_lo, bx.a_hi, count);
    match dims.k {
        1 => {
            let shots = map_range(exec, count, |i| shoot(&model, a_values[i], 0.0, SCAN_TOL, false));
            let blow_ups = shots.iter().filter(|s| !s.reached_boundary()).count();
            let positive_shots = shots.iter().filter(|s| s.positive_inside()).count();
            let mut candidates = 0;
            let mut certified = 0;
            for (i, w) in shots.windows(2).enumerate() {
                let change = w[0].reached_boundary() && w[1].reached_boundary() && (w[0].v_end > 0.0) != (w[1].v_end > 0.0);
                if change && (w[0].positive_inside() || w[1].positive_inside()) {
                    candidates += 1;
                    let g = |a: f64| shoot(&model, a, 0.0, SHOT_TOL, false).v_end;
                    if let Ok(br) = Bracket::new(a_values[i], a_values[i + 1], w[0].v_end, w[1].v_end) {
                        if let Ok(a) = find_root(g, br, 1e-13 * a_values[i + 1]) {
                            if shoot(&model, a, 0.0, SHOT_TOL, false).positive_inside() {
                                certified += 1;
                            }
                        }
                    }
                }
            }
            Ok(ScanReport {
                lambda,
                a_values,
                b_values: vec![],
                shots: count,
                blow_ups,
                positive_shots,
                candidates,
                certified,
                thresholds: vec![],
            })
        }
        2 => {
            let side = log_grid(bx.b_lo, bx.b_hi, bx.b_count);
            let mut b_values: Vec<f64> = side.iter().rev().map(|b| -b).collect();
            b_values.push(0.0);
            b_values.extend(side);
            let nb = b_values.len();
            let shots = map_range(exec, count * nb, |idx| shoot(&model, a_values[idx / nb], b_values[idx % nb], SCAN_TOL, false));
            let blow_ups = shots.iter().filter(|s| !s.reached_boundary()).count();
            let positive_shots = shots.iter().filter(|s| s.positive_inside() && s.v_end > 0.0).count();
            let thresholds: Vec<Option<ThresholdPoint>> = map_range(exec, count, |i| {
                threshold_from_row(&model, a_values[i], &b_values, &shots[i * nb..(i + 1) * nb])
            });
            let mut extra_shots = thresholds.iter().flatten().map(|t| t.shots).sum::<usize>();
            let mut candidates = 0;
            let mut certified = 0;
            for i in 0..count - 1 {
                let (Some(lo), Some(hi)) = (&thresholds[i], &thresholds[i + 1]) else { continue };
                if lo.at_boundary == hi.at_boundary {
                    continue;
                }
                candidates += 1;
                let (found, used) = refine_candidate(&model, &b_values, *lo, *hi);
                extra_shots += used;
                if found.is_some() {
                    certified += 1;
                }
            }
            let thresholds: Vec<ThresholdPoint> = thresholds.into_iter().flatten().collect();
            Ok(ScanReport {
                lambda,
                a_values,
                b_values,
                shots: count * nb + extra_shots,
                blow_ups,
                positive_shots,
                candidates,
                certified,
                thresholds,
            })
        }
        k => Err(Error::InvalidDims { n: dims.n, k }),
    }
}
