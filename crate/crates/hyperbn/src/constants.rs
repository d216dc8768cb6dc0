//! Closed-form and quadrature-based constants.

use num_rational::Ratio;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, sphere_area, GeodesicBall, ProblemDims};
use crate::numerics::quad::integrate_adaptive_rel;
use crate::specfun::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ThresholdName {
    Sobolev,
    LambdaBar,
    LambdaUnder,
    LambdaStarUpper,
    LambdaStarMin,
    Hls,
}

/// A diagnostics entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Diag {
    Num(f64),
    Flag(bool),
    Text(String),
    List(Vec<f64>),
}

impl From<f64> for Diag {
    fn from(v: f64) -> Self {
        Diag::Num(v)
    }
}
impl From<bool> for Diag {
    fn from(v: bool) -> Self {
        Diag::Flag(v)
    }
}
impl From<&str> for Diag {
    fn from(v: &str) -> Self {
        Diag::Text(v.to_string())
    }
}
impl From<String> for Diag {
    fn from(v: String) -> Self {
        Diag::Text(v)
    }
}
impl From<Vec<f64>> for Diag {
    fn from(v: Vec<f64>) -> Self {
        Diag::List(v)
    }
}

pub type Diagnostics = BTreeMap<String, Diag>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub name: ThresholdName,
    pub dims: Option<ProblemDims>,
    pub ball: Option<GeodesicBall>,
    pub parameter: Option<f64>,
    pub value: f64,
    pub error_estimate: f64,
    pub diagnostics: Diagnostics,
}

impl ThresholdReport {
    fn new(name: ThresholdName, value: f64, error_estimate: f64) -> Self {
        Self { name, dims: None, ball: None, parameter: None, value, error_estimate, diagnostics: Diagnostics::new() }
    }

    fn note(mut self, key: &str, v: impl Into<Diag>) -> Self {
        self.diagnostics.insert(key.to_string(), v.into());
        self
    }

    pub fn diag(&self, key: &str) -> Option<&Diag> {
        self.diagnostics.get(key)
    }
}

fn gamma_ln(x: f64) -> f64 {
    ln_gamma(x).expect("gamma argument away from poles").0
}

/// `∏_{j=1}^k (2j−1)²/4` as an exact fraction.
pub fn lambda_bar_exact(k: u32) -> Ratio<i128> {
    (1..=k as i128).fold(Ratio::from_integer(1), |acc, j| acc * Ratio::new((2 * j - 1).pow(2), 4))
}

pub fn lambda_bar(k: u32) -> ThresholdReport {
    let exact = lambda_bar_exact(k);
    let value = *exact.numer() as f64 / *exact.denom() as f64;
    ThresholdReport::new(ThresholdName::LambdaBar, value, 0.0).note("exact", format!("{}/{}", exact.numer(), exact.denom()))
}

/// `∏_{ℓ=1}^k ((2ℓ−1)² + τ²)/4`, the spectral symbol of `P_k`.
pub fn pk_symbol(tau: f64, k: u32) -> f64 {
    let t2 = tau * tau;
    (1..=k).map(|l| (((2 * l - 1) as f64).powi(2) + t2) / 4.0).product()
}

/// `S_{n,k} = ∏_{i=0}^{k−1} (n(n−2)/4 − i(i+1)) · |S^n|^{2k/n}`.
pub fn sobolev_constant(dims: ProblemDims) -> ThresholdReport {
    let n = dims.n as i128;
    let base = Ratio::new(n * (n - 2), 4);
    let factors: Vec<Ratio<i128>> = (0..dims.k as i128).map(|i| base - Ratio::from_integer(i * (i + 1))).collect();
    let prefactor = factors.iter().fold(Ratio::from_integer(1), |a, f| a * f);
    let positive = factors.iter().all(|f| *f > Ratio::from_integer(0));
    let pf = *prefactor.numer() as f64 / *prefactor.denom() as f64;
    let value = pf * sphere_area(dims.n).powf(2.0 * dims.k as f64 / dims.nf());
    let mut r = ThresholdReport::new(ThresholdName::Sobolev, value, 4.0 * f64::EPSILON * value.abs())
        .note("prefactor", format!("{}/{}", prefactor.numer(), prefactor.denom()))
        .note("all_factors_positive", positive);
    r.dims = Some(dims);
    r
}

/// `C_{n,λ} = π^{λ/2} Γ(n/2−λ/2)/Γ(n−λ/2) · (Γ(n/2)/Γ(n))^{−1+λ/n}`.
pub fn hls_constant(n: u32, exponent: f64) -> Result<ThresholdReport> {
    let nf = n as f64;
    if !(exponent > 0.0 && exponent < nf) {
        return Err(Error::ExponentOutOfRange(exponent));
    }
    let l = exponent;
    let ln = 0.5 * l * PI.ln() + gamma_ln(0.5 * nf - 0.5 * l) - gamma_ln(nf - 0.5 * l)
        + (l / nf - 1.0) * (gamma_ln(0.5 * nf) - gamma_ln(nf));
    let value = ln.exp();
    let mut r = ThresholdReport::new(ThresholdName::Hls, value, 1e-13 * value);
    r.parameter = Some(exponent);
    Ok(r.note("n", nf))
}

/// Binomial-type coefficients `Γ(j+α)/(Γ(j+1)Γ(α))`, `α = (n−2k)/2`.
fn under_coefficients(dims: ProblemDims) -> Vec<f64> {
    let alpha = 0.5 * (dims.n - 2 * dims.k) as f64;
    (0..dims.k)
        .map(|j| {
            let j = j as f64;
            (gamma_ln(j + alpha) - gamma_ln(j + 1.0) - gamma_ln(alpha)).exp()
        })
        .collect()
}

/// Numerator `Γ(n/2)Γ(k)Σ_j coef_j` of the Λ̲ formula.
pub fn underline_lambda_numerator(dims: ProblemDims) -> f64 {
    let s: f64 = under_coefficients(dims).iter().sum();
    (gamma_ln(0.5 * dims.nf()) + gamma_ln(dims.k as f64)).exp() * s
}

/// The bracketed integrand of the Λ̲ denominator at `r`.
pub fn underline_lambda_integrand(dims: ProblemDims, r: f64) -> f64 {
    let coef = under_coefficients(dims);
    let k = dims.k as i32;
    let s = 1.0 - r * r;
    let mut bracket = 2f64.powi(2 * k - 1);
    let mut pw = 1.0;
    for c in &coef {
        bracket -= c * pw;
        pw *= s;
    }
    bracket * bracket * r.powi(dims.n as i32 - 1) / s.powi(2 * k)
}

pub const UNDER_EPSILONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Λ̲ evaluated literally on the truncated range `[0, 1−ε]`.
///
/// The integrand does not vanish at `r = 1`, so the truncated integrals grow
/// as ε shrinks. The report carries the whole ε family, the log–log slope of
/// the integral against ε, and a `divergent` flag; `value` is the quotient at
/// the smallest ε.
pub fn underline_lambda(dims: ProblemDims) -> Result<ThresholdReport> {
    let (n, k) = (dims.n, dims.k);
    if n < 2 * k + 2 || n > 4 * k - 1 {
        return Err(Error::DimensionOutOfRange { n, k });
    }
    let alpha = 0.5 * (n - 2 * k) as f64;
    let numer = underline_lambda_numerator(dims);
    let pre = 2f64.powf(0.5 * (n + 2 * k) as f64) * gamma_ln(alpha).exp();
    let mut integrals = Vec::new();
    let mut errs = Vec::new();
    for eps in UNDER_EPSILONS {
        let q = integrate_adaptive_rel(|r| underline_lambda_integrand(dims, r), 0.0, 1.0 - eps, 0.0, 1e-12);
        integrals.push(q.value);
        errs.push(q.error_estimate);
    }
    // least-squares slope of ln I against ln ε
    let xs: Vec<f64> = UNDER_EPSILONS.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = integrals.iter().map(|i| i.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let divergent = slope < -0.5;
    let values: Vec<f64> = integrals.iter().map(|i| numer / (pre * i)).collect();
    let last = *values.last().unwrap();
    let spread = (values[1] - values[2]).abs();
    let mut r = ThresholdReport::new(ThresholdName::LambdaUnder, last, spread)
        .note("divergent", divergent)
        .note("fitted_exponent", slope)
        .note("epsilons", UNDER_EPSILONS.to_vec())
        .note("truncated_integrals", integrals)
        .note("quadrature_errors", errs)
        .note("regularized_values", values)
        .note("numerator", numer)
        .note("bracket_at_r1", 2f64.powi(2 * k as i32 - 1) - 1.0);
    if divergent {
        r = r.note("warning", "denominator integral grows as the cutoff approaches r = 1; value depends on the cutoff");
    }
    r.dims = Some(dims);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub sup: f64,
    pub argmax: f64,
    /// Ratio at the right end of the scanned range.
    pub tail_value: f64,
    /// Limit of the ratio as τ → ∞ (1 when j = k, 0 when j < k).
    pub tail_limit: f64,
    /// Tail behaviour matches `tail_limit`: monotone decay for j < k, a
    /// plateau approaching 1 for j = k.
    pub finite_certified: bool,
}

/// Ratio `(((n−1)² + τ²)/4)^j / (pk_symbol(τ, k) − λ)`.
pub fn domination_ratio(dims: ProblemDims, lambda: f64, j: u32, tau: f64) -> f64 {
    let nm1 = dims.nf() - 1.0;
    ((nm1 * nm1 + tau * tau) / 4.0).powi(j as i32) / (pk_symbol(tau, dims.k) - lambda)
}

pub const DOMINATION_TAU_MAX: f64 = 1e3;

/// Supremum over τ ∈ [0, 10³] of the domination ratio, from a 10⁴-point
/// logarithmic grid followed by golden-section refinement.
pub fn symbol_domination_constant(dims: ProblemDims, lambda: f64, j: u32) -> Result<DominationReport> {
    let bound = pk_symbol(0.0, dims.k);
    if lambda >= bound {
        return Err(Error::DenominatorNonPositive { lambda, bound });
    }
    assert!(j >= 1 && j <= dims.k, "order j must lie in 1..=k");
    let f = |t: f64| domination_ratio(dims, lambda, j, t);
    let m = 10_000;
    let lo = 1e-3f64;
    let mut taus = vec![0.0];
    taus.extend((0..m).map(|i| lo * (DOMINATION_TAU_MAX / lo).powf(i as f64 / (m - 1) as f64)));
    let vals: Vec<f64> = taus.iter().map(|&t| f(t)).collect();
    let (imax, _) = vals.iter().enumerate().fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let (mut a, mut b) = (taus[imax.saturating_sub(1)], taus[(imax + 1).min(taus.len() - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) >= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = 0.5 * (a + b);
    let (sup, argmax) = if f(refined) > vals[imax] { (f(refined), refined) } else { (vals[imax], taus[imax]) };
    let tail_value = *vals.last().unwrap();
    let tail = &vals[imax.max(m / 2)..];
    let finite_certified = if j < dims.k {
        tail.windows(2).all(|w| w[1] <= w[0])
    } else {
        // approaches 1 without oscillation
        tail.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs() * (1.0 + 1e-12))
            && (tail_value - 1.0).abs() < 1e-3
    };
    Ok(DominationReport {
        sup,
        argmax,
        tail_value,
        tail_limit: if j < dims.k { 0.0 } else { 1.0 },
        finite_certified: finite_certified && sup.is_finite(),
    })
}

/// Λ* of the bounded-domain existence theorem: both
/// `Λ₁ − Vol^{2/q−1} S_{n,k}` and Λ̲ (when defined) are reported, and the
/// value is the minimum of those available.
pub fn lambda_star_upper(dims: ProblemDims, ball: GeodesicBall, lambda1: f64) -> Result<ThresholdReport> {
    let vol = ball_volume(ball.rho_bar, dims.n);
    let s = sobolev_constant(dims).value;
    let first = lambda1 - vol.powf(2.0 / dims.q - 1.0) * s;
    let under = underline_lambda(dims).ok();
    let (value, name) = match &under {
        Some(u) if u.value < first => (u.value, ThresholdName::LambdaStarMin),
        Some(_) => (first, ThresholdName::LambdaStarMin),
        None => (first, ThresholdName::LambdaStarUpper),
    };
    let mut r = ThresholdReport::new(name, value, 1e-10 * value.abs())
        .note("eigen_minus_sobolev", first)
        .note("lambda1", lambda1)
        .note("volume", vol)
        .note("volume_factor", vol.powf(2.0 / dims.q - 1.0))
        .note("sobolev_constant", s);
    match under {
        Some(u) => {
            r = r.note("lambda_under", u.value).note(
                "lambda_under_divergent",
                matches!(u.diag("divergent"), Some(Diag::Flag(true))),
            )
        }
        None => {
            r = r.note(
                "lambda_under",
                "undefined for this dimension; the n = 2k+1 alternative (Λ* = Λ̲) has no formula to evaluate",
            )
        }
    }
    if dims.n == 2 * dims.k + 1 {
        r = r.note(
            "n_2k_plus_1",
            "two admissible choices exist for n = 2k+1 (eigenvalue-minus-Sobolev and Λ̲); the first is reported",
        );
    }
    r.dims = Some(dims);
    r.ball = Some(ball);
    Ok(r)
}
