//! The `k = 2` existence threshold λ* on geodesic balls, two ways.
//!
//! Determinant: `P2 − λ = (P1 − λ₁)(P1 − λ₂)` with `λ₁,₂ = −1 ± √(1+λ)`.
//! Regular radial solutions of `(P1 − λ_j)u = 0` are
//! `sinh^{(2−n)/2}ρ · P(κ_j, (2−n)/2; ρ)` with `κ_j = −λ_j`, and the clamped
//! conditions at ρ̄ reduce to the vanishing of a 2×2 determinant in the
//! orders `(2−n)/2` and `(4−n)/2`.
//!
//! Quotient: smallest eigenvalue of
//! `∫|φ″|² r^{7−n} + 3(n−3)∫|φ′|² r^{5−n}` over `∫|φ|² p⁴ r^{7−n}`,
//! `p = 2/(1−r²)`, with `φ(R) = φ′(R) = 0`, discretized by C¹ cubic Hermite
//! elements.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::constants::{Diag, Diagnostics};
use crate::error::{Error, Result};
use crate::geometry::{conformal_factor, GeodesicBall, ProblemDims};
use crate::numerics::eig::{smallest_generalized_eigenvalue, DenseSymmetricPair};
use crate::numerics::fd::fornberg_weights;
use crate::numerics::gauss::gauss_legendre;
use crate::numerics::roots::{find_root, scan_sign_changes, Bracket};
use crate::specfun::legendre::{legendre_p_kappa, legendre_p_series_deriv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LambdaStarMethod {
    Determinant,
    Quotient,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaStarReport {
    pub lambda_star: f64,
    pub error_estimate: f64,
    pub method: LambdaStarMethod,
    pub ball: GeodesicBall,
    pub dims: ProblemDims,
    pub bracket: Option<(f64, f64)>,
    pub cross_check_gap: Option<f64>,
    pub diagnostics: Diagnostics,
}

fn check_k2(dims: ProblemDims) -> Result<()> {
    if dims.k != 2 || !(5..=7).contains(&dims.n) {
        return Err(Error::DimensionOutOfRange { n: dims.n, k: dims.k });
    }
    Ok(())
}

/// Factorization roots `(λ₁, λ₂)` of `x(x+2) = λ`.
pub fn factor_roots(lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > -1.0) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let s = (1.0 + lambda).sqrt();
    Ok((-1.0 + s, -1.0 - s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantValue {
    /// `P(κ₁,μ)P(κ₂,μ+1) − P(κ₂,μ)P(κ₁,μ+1)`, `μ = (2−n)/2`.
    pub reduced: f64,
    /// `P(κ₁,μ)P′(κ₂,μ) − P(κ₂,μ)P′(κ₁,μ)` with series derivatives.
    pub derivative_form: f64,
}

/// Determinant with explicit degree parameters; `(κ₁, κ₂)` in the columns.
pub fn determinant_for_kappas(k1: f64, k2: f64, n: u32, rho_bar: f64) -> Result<DeterminantValue> {
    let mu = (2.0 - n as f64) / 2.0;
    let p = |k: f64, m: f64| legendre_p_kappa(k, m, rho_bar);
    let (a1, a2) = (p(k1, mu)?, p(k2, mu)?);
    let (b1, b2) = (p(k1, mu + 1.0)?, p(k2, mu + 1.0)?);
    let (d1, d2) = (legendre_p_series_deriv(k1, mu, rho_bar)?, legendre_p_series_deriv(k2, mu, rho_bar)?);
    Ok(DeterminantValue { reduced: a1 * b2 - a2 * b1, derivative_form: a1 * d2 - a2 * d1 })
}

/// The Legendre determinant at λ (`λ > −1`).
pub fn lambda_star_determinant(lambda: f64, dims: ProblemDims, ball: GeodesicBall) -> Result<DeterminantValue> {
    check_k2(dims)?;
    let (l1, l2) = factor_roots(lambda)?;
    determinant_for_kappas(-l1, -l2, dims.n, ball.rho_bar)
}

pub const SCAN_POINTS: usize = 2000;
pub const SCAN_LO: f64 = 1e-6;
/// The scan runs slightly past the supplied Λ₁ so a root sitting exactly at
/// the eigenvalue is not lost to discretization error in Λ₁.
pub const SCAN_OVERSHOOT: f64 = 1.05;

/// First positive root of the reduced determinant.
pub fn find_lambda_star(dims: ProblemDims, ball: GeodesicBall, lambda1: f64) -> Result<LambdaStarReport> {
    check_k2(dims)?;
    let hi = SCAN_OVERSHOOT * lambda1;
    let f = |l: f64| lambda_star_determinant(l, dims, ball).map(|d| d.reduced).unwrap_or(f64::NAN);
    let g = |l: f64| lambda_star_determinant(l, dims, ball).map(|d| d.derivative_form).unwrap_or(f64::NAN);
    let brackets = scan_sign_changes(f, SCAN_LO, hi, SCAN_POINTS);
    let alt = scan_sign_changes(g, SCAN_LO, hi, SCAN_POINTS);
    let Some(first) = brackets.first().copied() else {
        return Err(Error::NoRootFound(format!(
            "no sign change of the determinant on ({SCAN_LO}, {hi}] with {SCAN_POINTS} points"
        )));
    };
    if alt.first().map(|b| (b.lo, b.hi)) != Some((first.lo, first.hi)) {
        return Err(Error::NoRootFound(format!(
            "reduced and derivative-form determinants disagree on the first bracket: {:?} vs {:?}",
            (first.lo, first.hi),
            alt.first().map(|b| (b.lo, b.hi))
        )));
    }
    let root = find_root(f, first, 1e-10 * first.hi)?;
    let mut diagnostics = Diagnostics::new();
    diagnostics.insert("scan_hi".into(), Diag::Num(hi));
    diagnostics.insert("lambda1".into(), Diag::Num(lambda1));
    diagnostics.insert("brackets_found".into(), Diag::Num(brackets.len() as f64));
    diagnostics.insert("below_lambda1".into(), Diag::Flag(root < lambda1));
    Ok(LambdaStarReport {
        lambda_star: root,
        error_estimate: 1e-10 * root,
        method: LambdaStarMethod::Determinant,
        ball,
        dims,
        bracket: Some((first.lo, first.hi)),
        cross_check_gap: None,
        diagnostics,
    })
}

/// Refine a user-supplied bracket of the determinant.
pub fn refine_determinant_root(dims: ProblemDims, ball: GeodesicBall, lo: f64, hi: f64) -> Result<f64> {
    let f = |l: f64| lambda_star_determinant(l, dims, ball).map(|d| d.reduced).unwrap_or(f64::NAN);
    let b = Bracket::evaluate(&f, lo, hi)?;
    find_root(f, b, 1e-12 * hi)
}

/// Discrete minimizer of the quotient on a uniform r-grid.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientSolution {
    pub value: f64,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

fn hermite(xi: f64, h: f64) -> [[f64; 4]; 3] {
    let (x2, x3) = (xi * xi, xi * xi * xi);
    [
        [1.0 - 3.0 * x2 + 2.0 * x3, h * (xi - 2.0 * x2 + x3), 3.0 * x2 - 2.0 * x3, h * (x3 - x2)],
        [
            (-6.0 * xi + 6.0 * x2) / h,
            1.0 - 4.0 * xi + 3.0 * x2,
            (6.0 * xi - 6.0 * x2) / h,
            -2.0 * xi + 3.0 * x2,
        ],
        [(-6.0 + 12.0 * xi) / (h * h), (-4.0 + 6.0 * xi) / h, (6.0 - 12.0 * xi) / (h * h), (-2.0 + 6.0 * xi) / h],
    ]
}

/// Solve the discretized quotient problem with `elements` cubic elements.
pub fn quotient_minimizer(dims: ProblemDims, ball: GeodesicBall, elements: usize) -> Result<QuotientSolution> {
    check_k2(dims)?;
    let n = dims.n as i32;
    let big_r = ball.radius;
    let h = big_r / elements as f64;
    let ndof = 2 * (elements + 1);
    let mut a = DMatrix::zeros(ndof, ndof);
    let mut b = DMatrix::zeros(ndof, ndof);
    let (gx, gw) = gauss_legendre(8);
    let c1 = 3.0 * (n - 3) as f64;
    for e in 0..elements {
        let r0 = e as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let xi = 0.5 * (x + 1.0);
            let r = r0 + h * xi;
            let ww = 0.5 * w * h;
            let basis = hermite(xi, h);
            let w2 = r.powi(7 - n) * ww;
            let w1 = c1 * r.powi(5 - n) * ww;
            let w0 = conformal_factor(r).powi(4) * r.powi(7 - n) * ww;
            for i in 0..4 {
                for j in 0..4 {
                    let (gi, gj) = (2 * e + i, 2 * e + j);
                    a[(gi, gj)] += w2 * basis[2][i] * basis[2][j] + w1 * basis[1][i] * basis[1][j];
                    b[(gi, gj)] += w0 * basis[0][i] * basis[0][j];
                }
            }
        }
    }
    // clamp at R; φ′(0) = 0 is needed for a finite form when n ≥ 6
    let keep: Vec<usize> = (0..ndof - 2).filter(|&i| !(i == 1 && n >= 6)).collect();
    let sub = |m: &DMatrix<f64>| DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])]);
    let (a, b) = (sub(&a), sub(&b));
    // exact symmetry by construction up to summation order
    let a = (&a + a.transpose()) * 0.5;
    let b = (&b + b.transpose()) * 0.5;
    let pair = DenseSymmetricPair::new(a, b)?;
    let e = smallest_generalized_eigenvalue(&pair)?;
    let mut full = vec![0.0; ndof];
    for (slot, &i) in keep.iter().enumerate() {
        full[i] = e.vector[slot];
    }
    let scale = full.iter().step_by(2).fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
    let r = (0..=elements).map(|i| i as f64 * h).collect();
    let phi = full.iter().step_by(2).map(|v| v / scale).collect();
    let dphi = full.iter().skip(1).step_by(2).map(|v| v / scale).collect();
    Ok(QuotientSolution { value: e.value, r, phi, dphi })
}

/// λ* from the quotient, Richardson-extrapolated over `grid/4`, `grid/2`
/// and `grid` elements with the observed convergence order.
pub fn lambda_star_quotient(dims: ProblemDims, ball: GeodesicBall, grid: usize) -> Result<LambdaStarReport> {
    check_k2(dims)?;
    if grid < 500 {
        return Err(Error::GridTooCoarse { needed: 500, got: grid });
    }
    let g = grid - grid % 4;
    let v4 = quotient_minimizer(dims, ball, g / 4)?.value;
    let v2 = quotient_minimizer(dims, ball, g / 2)?.value;
    let v1 = quotient_minimizer(dims, ball, g)?.value;
    let ratio = (v4 - v2) / (v2 - v1);
    let observed = if ratio > 1.0 { ratio.log2() } else { f64::NAN };
    let order = if (1.0..=8.0).contains(&observed) { observed } else { 4.0 };
    let extrap = v1 + (v1 - v2) / (2f64.powf(order) - 1.0);
    let mut diagnostics = Diagnostics::new();
    diagnostics.insert("grid_values".into(), Diag::List(vec![v4, v2, v1]));
    diagnostics.insert("observed_order".into(), Diag::Num(observed));
    diagnostics.insert("order_used".into(), Diag::Num(order));
    Ok(LambdaStarReport {
        lambda_star: extrap,
        error_estimate: (extrap - v1).abs(),
        method: LambdaStarMethod::Quotient,
        ball,
        dims,
        bracket: None,
        cross_check_gap: None,
        diagnostics,
    })
}

/// Relative gap `|λ*_det − λ*_quot| / λ*_det`.
pub fn cross_check_gap(det: f64, quot: f64) -> f64 {
    (det - quot).abs() / det.abs()
}

/// Derivatives 0..=4 at every point of a uniform grid with 9-point stencils
/// (shifted near the ends).
fn derivatives9(f: &[f64], h: f64) -> Vec<[f64; 5]> {
    let len = f.len();
    (0..len)
        .map(|i| {
            let start = i.saturating_sub(4).min(len - 9);
            let nodes: Vec<f64> = (0..9).map(|j| (start + j) as f64 - i as f64).collect();
            let w = fornberg_weights(0.0, &nodes, 4);
            let mut d = [0.0; 5];
            for (k, dk) in d.iter_mut().enumerate() {
                *dk = (0..9).map(|j| w[k][j] * f[start + j]).sum::<f64>() / h.powi(k as i32);
            }
            d
        })
        .collect()
}

/// Pointwise residual of the Euler equation and the magnitude of its
/// largest term, on `r` in `[0.05R, R]`.
fn euler_terms(r: &[f64], phi: &[f64], lambda: f64, dims: ProblemDims) -> Result<Vec<(f64, f64, f64)>> {
    if r.len() != phi.len() {
        return Err(Error::ProfileMismatch("r and phi lengths differ".into()));
    }
    if r.len() < 20 {
        return Err(Error::GridTooCoarse { needed: 20, got: r.len() });
    }
    let h = (r[r.len() - 1] - r[0]) / (r.len() - 1) as f64;
    if r.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::NonUniformGrid);
    }
    let n = dims.nf();
    let big_r = r[r.len() - 1];
    let d = derivatives9(phi, h);
    Ok(r.iter()
        .zip(&d)
        .filter(|(x, _)| **x >= 0.05 * big_r * (1.0 - 1e-12))
        .map(|(&x, d)| {
            let p4 = conformal_factor(x).powi(4);
            let terms = [
                d[4],
                2.0 * (7.0 - n) * d[3] / x,
                (n * n - 16.0 * n + 51.0) * d[2] / (x * x),
                3.0 * (n - 5.0) * (n - 3.0) * d[1] / (x * x * x),
                -lambda * p4 * d[0],
            ];
            let res: f64 = terms.iter().sum();
            let big = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            (x, res, big)
        })
        .collect())
}

/// Scaled sup-norm residual `max|res| / max|largest term|` of
/// `φ⁗ + 2(7−n)φ‴/r + (n²−16n+51)φ″/r² + 3(n−5)(n−3)φ′/r³ − λp⁴φ`.
pub fn euler_ode_residual(r: &[f64], phi: &[f64], lambda: f64, dims: ProblemDims) -> Result<f64> {
    let t = euler_terms(r, phi, lambda, dims)?;
    let res = t.iter().fold(0.0f64, |m, x| m.max(x.1.abs()));
    let big = t.iter().fold(0.0f64, |m, x| m.max(x.2));
    Ok(res / big)
}

/// Pointwise residuals in both forms: the Euler form for φ and
/// `Δ²Φ − λp⁴Φ` for `Φ = r^{4−n}φ` (radial Euclidean bilaplacian),
/// multiplied back by `r^{n−4}`. Derivatives of Φ come from those of φ by
/// the Leibniz rule, so the comparison isolates the change of variables.
/// Returns `(r, res_φ, r^{n−4} res_Φ, scale)`.
pub fn euler_residual_both_forms(
    r: &[f64],
    phi: &[f64],
    lambda: f64,
    dims: ProblemDims,
) -> Result<Vec<(f64, f64, f64, f64)>> {
    let base = euler_terms(r, phi, lambda, dims)?;
    let n = dims.nf();
    let h = (r[r.len() - 1] - r[0]) / (r.len() - 1) as f64;
    let d = derivatives9(phi, h);
    let offset = r.len() - base.len();
    let binom = [[1.0, 0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 3.0, 1.0, 0.0], [
        1.0, 4.0, 6.0, 4.0, 1.0,
    ]];
    Ok(base
        .iter()
        .enumerate()
        .map(|(i, &(x, res, big))| {
            let dphi = d[i + offset];
            // j-th derivative of r^a, a = 4 − n
            let a = 4.0 - n;
            let mut pw = [0.0; 5];
            let mut coef = 1.0;
            for (j, pj) in pw.iter_mut().enumerate() {
                *pj = coef * x.powf(a - j as f64);
                coef *= a - j as f64;
            }
            let mut dd = [0.0; 5];
            for k in 0..5 {
                dd[k] = (0..=k).map(|j| binom[k][j] * pw[k - j] * dphi[j]).sum();
            }
            let bilap = dd[4] + 2.0 * (n - 1.0) * dd[3] / x + (n - 1.0) * (n - 3.0) * dd[2] / (x * x)
                - (n - 1.0) * (n - 3.0) * dd[1] / (x * x * x);
            let res_big = bilap - lambda * conformal_factor(x).powi(4) * dd[0];
            (x, res, x.powf(n - 4.0) * res_big, big)
        })
        .collect())
}

/// Take every `stride`-th point of the minimizer so that the spacing is
/// about `R/100`; finite differences of order four are then well above
/// rounding noise.
pub fn subsample_for_residual(sol: &QuotientSolution) -> (Vec<f64>, Vec<f64>) {
    let stride = ((sol.r.len() - 1) / 100).max(1);
    let r: Vec<f64> = sol.r.iter().step_by(stride).copied().collect();
    let phi: Vec<f64> = sol.phi.iter().step_by(stride).copied().collect();
    (r, phi)
}
